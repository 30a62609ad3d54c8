#pragma once

#include <filesystem>

#include "pvqa/frame.hpp"

namespace pvqa {

// PNG (any bit depth/color type, converted to 8-bit RGB) and binary PPM (P6).
// The format is chosen from the file extension.
Frame read_image(const std::filesystem::path& path);
void write_image(const Frame& frame, const std::filesystem::path& path);

}  // namespace pvqa
