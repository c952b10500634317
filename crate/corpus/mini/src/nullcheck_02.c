#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void nullcheck_02_bad()
{
    int * chunk = (int *)malloc(50 * sizeof(int));
    chunk[0] = 5; /* FLAW */
    printf("%d\n", chunk[0]);
    free(chunk);
}

void nullcheck_02_good()
{
    int * chunk = (int *)malloc(50 * sizeof(int));
    if (chunk != NULL)
    {
        chunk[0] = 5;
        printf("%d\n", chunk[0]);
        free(chunk);
    }
}

int main()
{
    nullcheck_02_bad();
    nullcheck_02_good();
    return 0;
}
