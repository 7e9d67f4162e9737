// SPDX-License-Identifier: Apache-2.0
#include "lskdet/feature_map.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "lskdet/error.hpp"

namespace lskdet {

FeatureMap::FeatureMap(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels < 0 || height < 0 || width < 0) throw ShapeError("negative feature map dimension");
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

bool bit_equal(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) return false;
  return a.size() == 0 || std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

void validate_feature_map(const FeatureMap& m, const char* what) {
  if (m.channels() < 1 || m.height() < 1 || m.width() < 1) {
    throw ShapeError(std::string(what) + ": feature map dimensions must be >= 1");
  }
  for (double v : m.data()) {
    if (!std::isfinite(v)) throw ShapeError(std::string(what) + ": feature map holds a non-finite value");
  }
}

}  // namespace lskdet
