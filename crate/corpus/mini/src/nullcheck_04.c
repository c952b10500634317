#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void nullcheck_04_bad()
{
    int * p = (int *)malloc(16 * sizeof(int));
    p[0] = 42; /* FLAW */
    printf("%d\n", p[0]);
    free(p);
}

void nullcheck_04_good()
{
    int * p = (int *)malloc(16 * sizeof(int));
    if (p != NULL)
    {
        p[0] = 42;
        printf("%d\n", p[0]);
        free(p);
    }
}

int main()
{
    nullcheck_04_bad();
    nullcheck_04_good();
    return 0;
}
