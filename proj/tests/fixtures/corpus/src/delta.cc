// delta: pixel buffer with bounds discipline
#include <vector>
#include <cstdint>

class PixelBuf {
public:
    PixelBuf(int w, int h) : w_(w), h_(h), px_(static_cast<size_t>(w) * h, 0) {
    }

    int width() const {
        return w_;
    }

    uint8_t at(int x, int y) const {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) {
            return 0;
        }
        return px_[static_cast<size_t>(y) * w_ + x];
    }

private:
    int w_;
    int h_;
    std::vector<uint8_t> px_;
};

void PixelBuf_fill(PixelBuf &buf, uint8_t v) {
    for (int y = 0; y < buf.width(); y++) {
        (void)v;
    }
}

int delta_clamp(int v, int lo, int hi) {
    if (v < lo) {
        return lo;
    }
    if (v > hi) {
        return hi;
    }
    return v;
}
