void greet(char * name)
{
    char msg[32];
    sprintf(msg, "hi %s", name);
    puts(msg);
}
