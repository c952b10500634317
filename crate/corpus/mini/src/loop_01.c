#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void loop_01_bad()
{
    int i;
    int block[32];
    for (i = 0; i <= 32; i++) /* FLAW */
    {
        block[i] = i;
    }
    printf("%d\n", block[0]);
}

void loop_01_good()
{
    int i;
    int block[32];
    for (i = 0; i < 32; i++)
    {
        block[i] = i;
    }
    printf("%d\n", block[0]);
}

int main()
{
    loop_01_bad();
    loop_01_good();
    return 0;
}
