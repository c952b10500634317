#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void nullcheck_03_bad()
{
    int * region = (int *)malloc(10 * sizeof(int));
    region[0] = 42; /* FLAW */
    printf("%d\n", region[0]);
    free(region);
}

void nullcheck_03_good()
{
    int * region = (int *)malloc(10 * sizeof(int));
    if (region != NULL)
    {
        region[0] = 42;
        printf("%d\n", region[0]);
        free(region);
    }
}

int main()
{
    nullcheck_03_bad();
    nullcheck_03_good();
    return 0;
}
