#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void index_00_bad(int index)
{
    int ticks = 0;
    int arr[50] = {0};
    arr[index] = 1; /* FLAW */
    printf("%d\n", arr[0]);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

void index_00_good(int index)
{
    int ticks = 0;
    int arr[50] = {0};
    arr[index % 50] = 1;
    printf("%d\n", arr[0]);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

int main()
{
    index_00_bad(7);
    index_00_good(7);
    return 0;
}
