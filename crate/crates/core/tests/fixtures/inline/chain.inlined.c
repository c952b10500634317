void f(int n)               // @14
{
    char buf[64];           // @16
    int size = n + 4;       // @17
    g_call(buf, size);      // =18
    char * s = buf;         // @6
    int len = size;         // @7
    h_call(len);            // =9
    int k = len;            // @1
    int m = k * 2;          // @3
    int cap = m + 1;        // @4 =9
    char * end = s + cap;   // @10
    strncpy(s, end, cap);   // @11
    int used = cap + s[0];  // @12 =18
    printf("%d", used);     // @19
}
