#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void alloc_04_bad()
{
    int hits = 0;
    char text[16];
    memset(text, 'A', 16 - 1);
    text[16 - 1] = '\0';
    char * chunk = (char *)malloc(strlen(text)); /* FLAW */
    if (chunk != NULL)
    {
        strcpy(chunk, text);
        printf("%s\n", chunk);
        free(chunk);
    }
    hits = hits + 1;
    printf("%d\n", hits);
}

void alloc_04_good()
{
    int hits = 0;
    char text[16];
    memset(text, 'A', 16 - 1);
    text[16 - 1] = '\0';
    char * chunk = (char *)malloc(strlen(text) + 1);
    if (chunk != NULL)
    {
        strcpy(chunk, text);
        printf("%s\n", chunk);
        free(chunk);
    }
    hits = hits + 1;
    printf("%d\n", hits);
}

int main()
{
    alloc_04_bad();
    alloc_04_good();
    return 0;
}
