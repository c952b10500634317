#include <stdio.h>
#include <stdlib.h>
#include <string.h>

void loop_00_bad()
{
    int n_i;
    int arr[10];
    for (n_i = 0; n_i <= 10; n_i++) /* FLAW */
    {
        arr[n_i] = n_i;
    }
    printf("%d\n", arr[0]);
}

void loop_00_good()
{
    int n_i;
    int arr[10];
    for (n_i = 0; n_i < 10; n_i++)
    {
        arr[n_i] = n_i;
    }
    printf("%d\n", arr[0]);
}

int main()
{
    loop_00_bad();
    loop_00_good();
    return 0;
}
