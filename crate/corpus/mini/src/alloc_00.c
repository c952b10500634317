#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void alloc_00_bad()
{
    char text[10];
    memset(text, 'A', 10 - 1);
    text[10 - 1] = '\0';
    char * mem = (char *)malloc(strlen(text)); /* FLAW */
    if (mem != NULL)
    {
        strcpy(mem, text);
        printf("%s\n", mem);
        free(mem);
    }
}

void alloc_00_good()
{
    char text[10];
    memset(text, 'A', 10 - 1);
    text[10 - 1] = '\0';
    char * mem = (char *)malloc(strlen(text) + 1);
    if (mem != NULL)
    {
        strcpy(mem, text);
        printf("%s\n", mem);
        free(mem);
    }
}

int main()
{
    alloc_00_bad();
    alloc_00_good();
    return 0;
}
