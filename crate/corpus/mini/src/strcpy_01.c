#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcpy_01_bad()
{
    int ticks = 0;
    char line[20];
    char input[50];
    memset(input, 'A', 50 - 1);
    input[50 - 1] = '\0';
    strcpy(line, input); /* FLAW */
    printf("%s\n", line);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

void strcpy_01_good()
{
    int ticks = 0;
    char line[20];
    char input[50];
    memset(input, 'A', 50 - 1);
    input[50 - 1] = '\0';
    strncpy(line, input, 20 - 1);
    line[20 - 1] = '\0';
    printf("%s\n", line);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

int main()
{
    strcpy_01_bad();
    strcpy_01_good();
    return 0;
}
