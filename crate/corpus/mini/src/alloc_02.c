#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void alloc_02_bad()
{
    int counter = 0;
    char input[50];
    memset(input, 'A', 50 - 1);
    input[50 - 1] = '\0';
    char * region = (char *)malloc(strlen(input)); /* FLAW */
    if (region != NULL)
    {
        strcpy(region, input);
        printf("%s\n", region);
        free(region);
    }
    counter = counter + 1;
    printf("%d\n", counter);
}

void alloc_02_good()
{
    int counter = 0;
    char input[50];
    memset(input, 'A', 50 - 1);
    input[50 - 1] = '\0';
    char * region = (char *)malloc(strlen(input) + 1);
    if (region != NULL)
    {
        strcpy(region, input);
        printf("%s\n", region);
        free(region);
    }
    counter = counter + 1;
    printf("%d\n", counter);
}

int main()
{
    alloc_02_bad();
    alloc_02_good();
    return 0;
}
