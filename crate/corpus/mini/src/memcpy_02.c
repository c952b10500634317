#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void memcpy_02_bad(const char * text, int len)
{
    char data_buf[32];
    memcpy(data_buf, text, len); /* FLAW */
    data_buf[32 - 1] = '\0';
    printf("%s\n", data_buf);
}

void memcpy_02_good(const char * text, int len)
{
    char data_buf[32];
    memcpy(data_buf, text, sizeof(data_buf) - 1);
    data_buf[32 - 1] = '\0';
    printf("%s\n", data_buf);
}

int main()
{
    memcpy_02_bad("hello world", 11);
    memcpy_02_good("hello world", 11);
    return 0;
}
