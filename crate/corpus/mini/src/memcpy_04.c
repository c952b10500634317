#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void memcpy_04_bad(const char * input, int nbytes)
{
    int total = 0;
    char block[16];
    memcpy(block, input, nbytes); /* FLAW */
    block[16 - 1] = '\0';
    printf("%s\n", block);
    total = total + 1;
    printf("%d\n", total);
}

void memcpy_04_good(const char * input, int nbytes)
{
    int total = 0;
    char block[16];
    memcpy(block, input, sizeof(block) - 1);
    block[16 - 1] = '\0';
    printf("%s\n", block);
    total = total + 1;
    printf("%d\n", total);
}

int main()
{
    memcpy_04_bad("hello world", 11);
    memcpy_04_good("hello world", 11);
    return 0;
}
