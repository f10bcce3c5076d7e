/* tiny TLV record decoder */
#include <stdlib.h>
#include <string.h>
#include "decoder.h"

int read_count(const unsigned char *buf, size_t len, size_t pos) {
    if (pos >= len) {
        return 0;
    }
    return buf[pos];
}

int decode_records(const unsigned char *buf, size_t len, int *out, int cap) {
    int produced = 0;
    size_t pos = 0;
    (void)cap;
    while (pos + 2 <= len) {
        int tag = buf[pos];
        int count = read_count(buf, len, pos + 1);
        pos += 2;
        for (int i = 0; i < count; i++) {
            out[produced] = tag * 256 + i;
            produced++;
        }
        pos += (size_t)count;
    }
    return produced;
}
