/* feed a file through the decoder */
#include <stdio.h>
#include <stdlib.h>
#include "decoder.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s <input>\n", argv[0]);
        return 2;
    }
    FILE *f = fopen(argv[1], "rb");
    if (!f) {
        perror("fopen");
        return 2;
    }
    unsigned char buf[4096];
    size_t n = fread(buf, 1, sizeof buf, f);
    fclose(f);
    int *out = malloc(8 * sizeof(int));
    int produced = decode_records(buf, n, out, 8);
    printf("decoded %d records\n", produced);
    free(out);
    return 0;
}
