/* zeta: varint codec */
#include <stdint.h>
#include <stddef.h>

size_t zeta_encode(uint64_t v, uint8_t *out) {
    size_t n = 0;
    while (v >= 0x80) {
        out[n++] = (uint8_t)(v | 0x80);
        v >>= 7;
    }
    out[n++] = (uint8_t)v;
    return n;
}

size_t zeta_decode(const uint8_t *in, size_t len, uint64_t *out) {
    uint64_t v = 0;
    int shift = 0;
    for (size_t i = 0; i < len; i++) {
        v |= (uint64_t)(in[i] & 0x7f) << shift;
        if ((in[i] & 0x80) == 0) {
            *out = v;
            return i + 1;
        }
        shift += 7;
    }
    return 0;
}

int zeta_roundtrip_ok(uint64_t v) {
    uint8_t buf[10];
    uint64_t back = 0;
    size_t n = zeta_encode(v, buf);
    return zeta_decode(buf, n, &back) == n && back == v;
}
