#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void strcat_04_bad()
{
    int ticks = 0;
    char out[20] = "";
    char text[44];
    memset(text, 'C', 44 - 1);
    text[44 - 1] = '\0';
    strcat(out, text); /* FLAW */
    printf("%s\n", out);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

void strcat_04_good()
{
    int ticks = 0;
    char out[20] = "";
    char text[44];
    memset(text, 'C', 44 - 1);
    text[44 - 1] = '\0';
    strncat(out, text, 20 - 1);
    printf("%s\n", out);
    ticks = ticks + 1;
    printf("%d\n", ticks);
}

int main()
{
    strcat_04_bad();
    strcat_04_good();
    return 0;
}
