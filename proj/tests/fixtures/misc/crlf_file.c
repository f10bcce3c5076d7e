int crlf_fn(int a) {
    return a * 2;
}
