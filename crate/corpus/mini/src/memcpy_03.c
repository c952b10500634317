#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void memcpy_03_bad(const char * msg, int count)
{
    int counter = 0;
    char block[32];
    memcpy(block, msg, count); /* FLAW */
    block[32 - 1] = '\0';
    printf("%s\n", block);
    counter = counter + 1;
    printf("%d\n", counter);
}

void memcpy_03_good(const char * msg, int count)
{
    int counter = 0;
    char block[32];
    memcpy(block, msg, sizeof(block) - 1);
    block[32 - 1] = '\0';
    printf("%s\n", block);
    counter = counter + 1;
    printf("%d\n", counter);
}

int main()
{
    memcpy_03_bad("hello world", 11);
    memcpy_03_good("hello world", 11);
    return 0;
}
