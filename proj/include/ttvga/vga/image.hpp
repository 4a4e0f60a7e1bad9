#pragma once

#include <string>

#include "ttvga/vga/capture.hpp"

namespace ttvga {

/// Binary PPM (P6), maxval 255.
std::string encode_ppm(const Frame& frame);

/// PNG, 8-bit RGB.
std::string encode_png(const Frame& frame);

} // namespace ttvga
