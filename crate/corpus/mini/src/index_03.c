#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void index_03_bad(int slot)
{
    int counter = 0;
    int data_buf[20] = {0};
    data_buf[slot] = 1; /* FLAW */
    printf("%d\n", data_buf[0]);
    counter = counter + 1;
    printf("%d\n", counter);
}

void index_03_good(int slot)
{
    int counter = 0;
    int data_buf[20] = {0};
    data_buf[slot % 20] = 1;
    printf("%d\n", data_buf[0]);
    counter = counter + 1;
    printf("%d\n", counter);
}

int main()
{
    index_03_bad(7);
    index_03_good(7);
    return 0;
}
