#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcat_01_bad()
{
    char dest[32] = "";
    char source[68];
    memset(source, 'C', 68 - 1);
    source[68 - 1] = '\0';
    strcat(dest, source); /* FLAW */
    printf("%s\n", dest);
}

void strcat_01_good()
{
    char dest[32] = "";
    char source[68];
    memset(source, 'C', 68 - 1);
    source[68 - 1] = '\0';
    strncat(dest, source, 32 - 1);
    printf("%s\n", dest);
}

int main()
{
    strcat_01_bad();
    strcat_01_good();
    return 0;
}
