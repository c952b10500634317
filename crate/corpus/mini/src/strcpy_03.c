#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcpy_03_bad()
{
    char name[20];
    char msg[40];
    memset(msg, 'A', 40 - 1);
    msg[40 - 1] = '\0';
    strcpy(name, msg); /* FLAW */
    printf("%s\n", name);
}

void strcpy_03_good()
{
    char name[20];
    char msg[40];
    memset(msg, 'A', 40 - 1);
    msg[40 - 1] = '\0';
    strncpy(name, msg, 20 - 1);
    name[20 - 1] = '\0';
    printf("%s\n", name);
}

int main()
{
    strcpy_03_bad();
    strcpy_03_good();
    return 0;
}
