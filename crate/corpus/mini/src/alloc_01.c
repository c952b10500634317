#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void alloc_01_bad()
{
    char source[50];
    memset(source, 'A', 50 - 1);
    source[50 - 1] = '\0';
    char * p = (char *)malloc(strlen(source)); /* FLAW */
    if (p != NULL)
    {
        strcpy(p, source);
        printf("%s\n", p);
        free(p);
    }
}

void alloc_01_good()
{
    char source[50];
    memset(source, 'A', 50 - 1);
    source[50 - 1] = '\0';
    char * p = (char *)malloc(strlen(source) + 1);
    if (p != NULL)
    {
        strcpy(p, source);
        printf("%s\n", p);
        free(p);
    }
}

int main()
{
    alloc_01_bad();
    alloc_01_good();
    return 0;
}
