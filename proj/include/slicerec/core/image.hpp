#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace srec {

// Float image, row-major HWC, values nominally in [0,1].
struct Image {
    int width = 0, height = 0, channels = 1;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c = 1, float fill = 0.f)
        : width(w), height(h), channels(c), data(static_cast<size_t>(w) * h * c, fill) {}

    float& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
};

// Binary coverage mask, 0/1 per pixel.
struct Mask {
    int width = 0, height = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v != 0;
        return n;
    }
    bool operator==(const Mask& o) const {
        return width == o.width && height == o.height && data == o.data;
    }
};

inline Mask mask_or(const Mask& a, const Mask& b) {
    assert(a.width == b.width && a.height == b.height);
    Mask r(a.width, a.height);
    for (size_t i = 0; i < r.data.size(); ++i) r.data[i] = (a.data[i] || b.data[i]) ? 1 : 0;
    return r;
}

inline size_t mask_diff_count(const Mask& a, const Mask& b) {
    assert(a.width == b.width && a.height == b.height);
    size_t n = 0;
    for (size_t i = 0; i < a.data.size(); ++i) n += (a.data[i] != 0) != (b.data[i] != 0);
    return n;
}

}  // namespace srec
