// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lskdet/box.hpp"

namespace lskdet {

enum class Split { kTrain, kVal, kTest };

/// Accepts "train", "val"/"validation", "test".
std::optional<Split> parse_split(std::string_view name);
std::string_view to_string(Split split);

/// 8-bit interleaved pixels, row-major, 1 (gray) or 3 (RGB) channels.
struct ImageData {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  ImageData() = default;
  ImageData(int width, int height, int channels, std::uint8_t fill = 0);

  std::uint8_t& at(int y, int x, int c) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const ImageData&) const = default;
};

struct Instance {
  Box box;
  int class_id = 0;

  bool operator==(const Instance&) const = default;
};

struct AnnotatedImage {
  std::int64_t image_id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  Split split = Split::kTrain;
  std::vector<Instance> instances;
  /// Set on patches: the source image and the window's top-left corner.
  std::optional<std::int64_t> parent_id;
  int offset_x = 0;
  int offset_y = 0;
  /// Absent in geometry-only mode.
  std::optional<ImageData> pixels;

  bool operator==(const AnnotatedImage&) const = default;
};

/// Images plus the category table; class ids index `class_names`, and
/// `category_ids` keeps the file's ids for writing back.
struct Dataset {
  std::vector<std::string> class_names;
  std::vector<std::int64_t> category_ids;
  std::vector<AnnotatedImage> images;

  /// Class index for a file category id, or nullopt.
  std::optional<int> class_index(std::int64_t category_id) const;
};

}  // namespace lskdet
