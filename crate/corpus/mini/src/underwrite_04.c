#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void underwrite_04_bad()
{
    int total = 0;
    char * walk;
    char data_buf[32];
    memset(data_buf, 'A', 32 - 1);
    data_buf[32 - 1] = '\0';
    walk = data_buf - 8; /* FLAW */
    walk[0] = 'B';
    printf("%s\n", walk);
    total = total + 1;
    printf("%d\n", total);
}

void underwrite_04_good()
{
    int total = 0;
    char * walk;
    char data_buf[32];
    memset(data_buf, 'A', 32 - 1);
    data_buf[32 - 1] = '\0';
    walk = data_buf;
    walk[0] = 'B';
    printf("%s\n", walk);
    total = total + 1;
    printf("%d\n", total);
}

int main()
{
    underwrite_04_bad();
    underwrite_04_good();
    return 0;
}
