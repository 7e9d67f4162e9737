// SPDX-License-Identifier: Apache-2.0
//
// Binary PGM (P5, gray) and PPM (P6, RGB) with maxval 255.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lskdet/dataset.hpp"

namespace lskdet {

/// Throws IoError on an unsupported magic, a maxval other than 255 or a
/// truncated raster.
ImageData decode_netpbm(std::string_view bytes);
std::string encode_netpbm(const ImageData& img);

ImageData load_netpbm(const std::filesystem::path& path);
void save_netpbm(const std::filesystem::path& path, const ImageData& img);

}  // namespace lskdet
