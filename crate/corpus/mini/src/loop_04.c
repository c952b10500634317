#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void loop_04_bad()
{
    int j;
    int table[32];
    for (j = 0; j <= 32; j++) /* FLAW */
    {
        table[j] = j;
    }
    printf("%d\n", table[0]);
}

void loop_04_good()
{
    int j;
    int table[32];
    for (j = 0; j < 32; j++)
    {
        table[j] = j;
    }
    printf("%d\n", table[0]);
}

int main()
{
    loop_04_bad();
    loop_04_good();
    return 0;
}
