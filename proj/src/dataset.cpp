// SPDX-License-Identifier: Apache-2.0
#include "lskdet/dataset.hpp"

#include "lskdet/error.hpp"

namespace lskdet {

std::optional<Split> parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

ImageData::ImageData(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) throw ShapeError("image needs non-negative size and 1 or 3 channels");
  pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

std::optional<int> Dataset::class_index(std::int64_t category_id) const {
  for (std::size_t i = 0; i < category_ids.size(); ++i) {
    if (category_ids[i] == category_id) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace lskdet
