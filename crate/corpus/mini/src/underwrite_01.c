#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void underwrite_01_bad()
{
    char * cursor;
    char block[50];
    memset(block, 'A', 50 - 1);
    block[50 - 1] = '\0';
    cursor = block - 8; /* FLAW */
    cursor[0] = 'B';
    printf("%s\n", cursor);
}

void underwrite_01_good()
{
    char * cursor;
    char block[50];
    memset(block, 'A', 50 - 1);
    block[50 - 1] = '\0';
    cursor = block;
    cursor[0] = 'B';
    printf("%s\n", cursor);
}

int main()
{
    underwrite_01_bad();
    underwrite_01_good();
    return 0;
}
