#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcat_02_bad()
{
    int calls = 0;
    char dest[10] = "";
    char source[24];
    memset(source, 'C', 24 - 1);
    source[24 - 1] = '\0';
    strcat(dest, source); /* FLAW */
    printf("%s\n", dest);
    calls = calls + 1;
    printf("%d\n", calls);
}

void strcat_02_good()
{
    int calls = 0;
    char dest[10] = "";
    char source[24];
    memset(source, 'C', 24 - 1);
    source[24 - 1] = '\0';
    strncat(dest, source, 10 - 1);
    printf("%s\n", dest);
    calls = calls + 1;
    printf("%d\n", calls);
}

int main()
{
    strcat_02_bad();
    strcat_02_good();
    return 0;
}
