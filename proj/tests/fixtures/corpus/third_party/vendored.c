/* vendored code, excluded by the deny list */
int vendored_one(int x) {
    return x + 1;
}

int vendored_two(int x) {
    return x + 2;
}
