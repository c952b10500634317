#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcpy_00_bad()
{
    char out[32];
    char input[74];
    memset(input, 'A', 74 - 1);
    input[74 - 1] = '\0';
    strcpy(out, input); /* FLAW */
    printf("%s\n", out);
}

void strcpy_00_good()
{
    char out[32];
    char input[74];
    memset(input, 'A', 74 - 1);
    input[74 - 1] = '\0';
    strncpy(out, input, 32 - 1);
    out[32 - 1] = '\0';
    printf("%s\n", out);
}

int main()
{
    strcpy_00_bad();
    strcpy_00_good();
    return 0;
}
