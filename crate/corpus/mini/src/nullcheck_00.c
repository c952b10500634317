#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void nullcheck_00_bad()
{
    int * heap = (int *)malloc(50 * sizeof(int));
    heap[0] = 1; /* FLAW */
    printf("%d\n", heap[0]);
    free(heap);
}

void nullcheck_00_good()
{
    int * heap = (int *)malloc(50 * sizeof(int));
    if (heap != NULL)
    {
        heap[0] = 1;
        printf("%d\n", heap[0]);
        free(heap);
    }
}

int main()
{
    nullcheck_00_bad();
    nullcheck_00_good();
    return 0;
}
