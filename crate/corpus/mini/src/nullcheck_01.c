#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void nullcheck_01_bad()
{
    int ticks = 0;
    int * region = (int *)malloc(10 * sizeof(int));
    region[0] = 1; /* FLAW */
    printf("%d\n", region[0]);
    free(region);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

void nullcheck_01_good()
{
    int ticks = 0;
    int * region = (int *)malloc(10 * sizeof(int));
    if (region != NULL)
    {
        region[0] = 1;
        printf("%d\n", region[0]);
        free(region);
    }
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

int main()
{
    nullcheck_01_bad();
    nullcheck_01_good();
    return 0;
}
