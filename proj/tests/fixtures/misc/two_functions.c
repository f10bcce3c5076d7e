/* two plain functions */

int foo(int a) {
    int b = a + 1;
    if (b > 3) {
        b -= 2;
    }
    return b;
    /* tail */
}

int bar(int a, int b) {
    int c = 0;
    for (int i = 0; i < a; i++) {
        c += b;
    }
    if (c < 0) {
        c = 0;
    }
}
