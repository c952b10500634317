#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void underwrite_03_bad()
{
    int hits = 0;
    char * pos;
    char block[32];
    memset(block, 'A', 32 - 1);
    block[32 - 1] = '\0';
    pos = block - 8; /* FLAW */
    pos[0] = 'B';
    printf("%s\n", pos);
    hits = hits + 1;
    printf("%d\n", hits);
}

void underwrite_03_good()
{
    int hits = 0;
    char * pos;
    char block[32];
    memset(block, 'A', 32 - 1);
    block[32 - 1] = '\0';
    pos = block;
    pos[0] = 'B';
    printf("%s\n", pos);
    hits = hits + 1;
    printf("%d\n", hits);
}

int main()
{
    underwrite_03_bad();
    underwrite_03_good();
    return 0;
}
