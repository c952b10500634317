#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void underwrite_00_bad()
{
    char * walk;
    char arr[50];
    memset(arr, 'A', 50 - 1);
    arr[50 - 1] = '\0';
    walk = arr - 8; /* FLAW */
    walk[0] = 'B';
    printf("%s\n", walk);
}

void underwrite_00_good()
{
    char * walk;
    char arr[50];
    memset(arr, 'A', 50 - 1);
    arr[50 - 1] = '\0';
    walk = arr;
    walk[0] = 'B';
    printf("%s\n", walk);
}

int main()
{
    underwrite_00_bad();
    underwrite_00_good();
    return 0;
}
