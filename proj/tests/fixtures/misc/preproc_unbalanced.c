/* alternate definitions split by preprocessor branches */
#include <stdio.h>

#ifdef WIDE_API
int pp_entry(long v) {
#else
int pp_entry(int v) {
#endif
    return (int)v + 1;
}

int pp_tail(int v) {
    return v - 1;
}
