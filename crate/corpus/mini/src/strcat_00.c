#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcat_00_bad()
{
    int counter = 0;
    char out[50] = "";
    char msg[104];
    memset(msg, 'C', 104 - 1);
    msg[104 - 1] = '\0';
    strcat(out, msg); /* FLAW */
    printf("%s\n", out);
    counter = counter + 1;
    printf("%d\n", counter);
}

void strcat_00_good()
{
    int counter = 0;
    char out[50] = "";
    char msg[104];
    memset(msg, 'C', 104 - 1);
    msg[104 - 1] = '\0';
    strncat(out, msg, 50 - 1);
    printf("%s\n", out);
    counter = counter + 1;
    printf("%d\n", counter);
}

int main()
{
    strcat_00_bad();
    strcat_00_good();
    return 0;
}
