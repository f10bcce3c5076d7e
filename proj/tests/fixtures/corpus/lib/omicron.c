/* omicron: overflow-checked add/mul */
#include <stdint.h>

int omicron_add_ok(uint32_t a, uint32_t b, uint32_t *out) {
    if (UINT32_MAX - a < b) {
        return 0;
    }
    *out = a + b;
    return 1;
}

int omicron_mul_ok(uint32_t a, uint32_t b, uint32_t *out) {
    if (a != 0 && b > UINT32_MAX / a) {
        return 0;
    }
    *out = a * b;
    return 1;
}
