// theta: tiny generic helpers
#include <vector>

template <typename T>
T theta_max(T a, T b) {
    if (a < b) {
        return b;
    }
    return a;
}

template <typename T>
T theta_sum(const std::vector<T> &xs) {
    T acc = T();
    for (const T &x : xs) {
        acc = acc + x;
    }
    return acc;
}

template <typename T>
void theta_swap(T &a, T &b) {
    T tmp = a;
    a = b;
    b = tmp;
}
