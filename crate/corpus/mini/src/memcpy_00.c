#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void memcpy_00_bad(const char * msg, int len)
{
    int total = 0;
    char arr[16];
    memcpy(arr, msg, len); /* FLAW */
    arr[16 - 1] = '\0';
    printf("%s\n", arr);
    total = total + 1;
    printf("%d\n", total);
}

void memcpy_00_good(const char * msg, int len)
{
    int total = 0;
    char arr[16];
    memcpy(arr, msg, sizeof(arr) - 1);
    arr[16 - 1] = '\0';
    printf("%s\n", arr);
    total = total + 1;
    printf("%d\n", total);
}

int main()
{
    memcpy_00_bad("hello world", 11);
    memcpy_00_good("hello world", 11);
    return 0;
}
