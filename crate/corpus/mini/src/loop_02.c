#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void loop_02_bad()
{
    int n_i;
    int buffer[16];
    for (n_i = 0; n_i <= 16; n_i++) /* FLAW */
    {
        buffer[n_i] = n_i;
    }
    printf("%d\n", buffer[0]);
}

void loop_02_good()
{
    int n_i;
    int buffer[16];
    for (n_i = 0; n_i < 16; n_i++)
    {
        buffer[n_i] = n_i;
    }
    printf("%d\n", buffer[0]);
}

int main()
{
    loop_02_bad();
    loop_02_good();
    return 0;
}
