#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void alloc_03_bad()
{
    int hits = 0;
    char source[32];
    memset(source, 'A', 32 - 1);
    source[32 - 1] = '\0';
    char * chunk = (char *)malloc(strlen(source)); /* FLAW */
    if (chunk != NULL)
    {
        strcpy(chunk, source);
        printf("%s\n", chunk);
        free(chunk);
    }
    hits = hits + 1;
    printf("%d\n", hits);
}

void alloc_03_good()
{
    int hits = 0;
    char source[32];
    memset(source, 'A', 32 - 1);
    source[32 - 1] = '\0';
    char * chunk = (char *)malloc(strlen(source) + 1);
    if (chunk != NULL)
    {
        strcpy(chunk, source);
        printf("%s\n", chunk);
        free(chunk);
    }
    hits = hits + 1;
    printf("%d\n", hits);
}

int main()
{
    alloc_03_bad();
    alloc_03_good();
    return 0;
}
