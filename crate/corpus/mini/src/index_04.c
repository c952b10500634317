#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void index_04_bad(int pos_i)
{
    int data_buf[10] = {0};
    data_buf[pos_i] = 1; /* FLAW */
    printf("%d\n", data_buf[0]);
}

void index_04_good(int pos_i)
{
    int data_buf[10] = {0};
    data_buf[pos_i % 10] = 1;
    printf("%d\n", data_buf[0]);
}

int main()
{
    index_04_bad(7);
    index_04_good(7);
    return 0;
}
