#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void index_01_bad(int index)
{
    int block[16] = {0};
    block[index] = 1; /* FLAW */
    printf("%d\n", block[0]);
}

void index_01_good(int index)
{
    int block[16] = {0};
    block[index % 16] = 1;
    printf("%d\n", block[0]);
}

int main()
{
    index_01_bad(7);
    index_01_good(7);
    return 0;
}
