/* sigma: command line scraps */
#include <string.h>

int sigma_is_flag(const char *arg) {
    return arg[0] == '-' && arg[1] != '\0';
}

const char *sigma_flag_name(const char *arg) {
    while (*arg == '-') {
        arg++;
    }
    return arg;
}

int sigma_match(const char *arg, const char *name) {
    if (!sigma_is_flag(arg)) {
        return 0;
    }
    return strcmp(sigma_flag_name(arg), name) == 0;
}
