void f(char *str) {
    int len = strlen(str);
    char buf[BUF_SIZE];
    if (len < BUF_SIZE)
        memcpy(buf, str, len);
}
