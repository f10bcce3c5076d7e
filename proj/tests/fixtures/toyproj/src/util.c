/* logging scraps */
#include <stdio.h>

void util_banner(const char *name) {
    fprintf(stderr, "[%s] starting\n", name);
}

int util_max(int a, int b) {
    if (a > b) {
        return a;
    }
    return b;
}
