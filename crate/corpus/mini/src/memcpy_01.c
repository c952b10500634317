#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void memcpy_01_bad(const char * source, int len)
{
    char buffer[16];
    memcpy(buffer, source, len); /* FLAW */
    buffer[16 - 1] = '\0';
    printf("%s\n", buffer);
}

void memcpy_01_good(const char * source, int len)
{
    char buffer[16];
    memcpy(buffer, source, sizeof(buffer) - 1);
    buffer[16 - 1] = '\0';
    printf("%s\n", buffer);
}

int main()
{
    memcpy_01_bad("hello world", 11);
    memcpy_01_good("hello world", 11);
    return 0;
}
