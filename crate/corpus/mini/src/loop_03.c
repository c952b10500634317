#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void loop_03_bad()
{
    int k;
    int table[10];
    for (k = 0; k <= 10; k++) /* FLAW */
    {
        table[k] = k;
    }
    printf("%d\n", table[0]);
}

void loop_03_good()
{
    int k;
    int table[10];
    for (k = 0; k < 10; k++)
    {
        table[k] = k;
    }
    printf("%d\n", table[0]);
}

int main()
{
    loop_03_bad();
    loop_03_good();
    return 0;
}
