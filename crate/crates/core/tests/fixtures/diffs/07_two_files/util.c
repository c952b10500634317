int scale(int v)
{
    int w = v * 4;
    return w;
}
