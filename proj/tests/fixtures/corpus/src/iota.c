/* iota: fixed-point math */
#include <stdint.h>

int32_t iota_mul(int32_t a, int32_t b) {
    int64_t wide = (int64_t)a * (int64_t)b;
    return (int32_t)(wide >> 16);
}

int32_t iota_div(int32_t a, int32_t b) {
    if (b == 0) {
        return 0;
    }
    int64_t wide = ((int64_t)a << 16) / b;
    return (int32_t)wide;
}

int32_t iota_lerp(int32_t a, int32_t b, int32_t t) {
    int32_t span = b - a;
    return a + iota_mul(span, t);
}
