#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcat_03_bad()
{
    int ticks = 0;
    char target[32] = "";
    char text[74];
    memset(text, 'C', 74 - 1);
    text[74 - 1] = '\0';
    strcat(target, text); /* FLAW */
    printf("%s\n", target);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

void strcat_03_good()
{
    int ticks = 0;
    char target[32] = "";
    char text[74];
    memset(text, 'C', 74 - 1);
    text[74 - 1] = '\0';
    strncat(target, text, 32 - 1);
    printf("%s\n", target);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

int main()
{
    strcat_03_bad();
    strcat_03_good();
    return 0;
}
