#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcpy_02_bad()
{
    int total = 0;
    char line[32];
    char source[74];
    memset(source, 'A', 74 - 1);
    source[74 - 1] = '\0';
    strcpy(line, source); /* FLAW */
    printf("%s\n", line);
    total = total + 1;
    printf("%d\n", total);
}

void strcpy_02_good()
{
    int total = 0;
    char line[32];
    char source[74];
    memset(source, 'A', 74 - 1);
    source[74 - 1] = '\0';
    strncpy(line, source, 32 - 1);
    line[32 - 1] = '\0';
    printf("%s\n", line);
    total = total + 1;
    printf("%d\n", total);
}

int main()
{
    strcpy_02_bad();
    strcpy_02_good();
    return 0;
}
