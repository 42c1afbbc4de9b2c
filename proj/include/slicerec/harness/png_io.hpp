#pragma once

#include <string>

#include "slicerec/core/image.hpp"

namespace srec {

// 8-bit PNG I/O (grayscale or RGB depending on Image::channels).
void write_png(const Image& image, const std::string& path);
Image read_png(const std::string& path);

}  // namespace srec
