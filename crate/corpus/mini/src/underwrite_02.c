#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void underwrite_02_bad()
{
    int counter = 0;
    char * walk;
    char table[10];
    memset(table, 'A', 10 - 1);
    table[10 - 1] = '\0';
    walk = table - 8; /* FLAW */
    walk[0] = 'B';
    printf("%s\n", walk);
    counter = counter + 1;
    printf("%d\n", counter);
}

void underwrite_02_good()
{
    int counter = 0;
    char * walk;
    char table[10];
    memset(table, 'A', 10 - 1);
    table[10 - 1] = '\0';
    walk = table;
    walk[0] = 'B';
    printf("%s\n", walk);
    counter = counter + 1;
    printf("%d\n", counter);
}

int main()
{
    underwrite_02_bad();
    underwrite_02_good();
    return 0;
}
