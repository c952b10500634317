#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void index_02_bad(int pos_i)
{
    int block[32] = {0};
    block[pos_i] = 1; /* FLAW */
    printf("%d\n", block[0]);
}

void index_02_good(int pos_i)
{
    int block[32] = {0};
    block[pos_i % 32] = 1;
    printf("%d\n", block[0]);
}

int main()
{
    index_02_bad(7);
    index_02_good(7);
    return 0;
}
