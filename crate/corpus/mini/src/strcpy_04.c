#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcpy_04_bad()
{
    int total = 0;
    char dest[10];
    char source[30];
    memset(source, 'A', 30 - 1);
    source[30 - 1] = '\0';
    strcpy(dest, source); /* FLAW */
    printf("%s\n", dest);
    total = total + 1;
    printf("%d\n", total);
}

void strcpy_04_good()
{
    int total = 0;
    char dest[10];
    char source[30];
    memset(source, 'A', 30 - 1);
    source[30 - 1] = '\0';
    strncpy(dest, source, 10 - 1);
    dest[10 - 1] = '\0';
    printf("%s\n", dest);
    total = total + 1;
    printf("%d\n", total);
}

int main()
{
    strcpy_04_bad();
    strcpy_04_good();
    return 0;
}
