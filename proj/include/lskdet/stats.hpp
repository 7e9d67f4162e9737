// SPDX-License-Identifier: Apache-2.0
//
// Dataset statistics: per-class instance counts plus aspect-ratio (w / h)
// and scale (sqrt(w h), pixels) histograms. Degenerate boxes are counted
// per class but left out of both histograms.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lskdet/dataset.hpp"

namespace lskdet {

/// Bin edges; the last bin is open-ended.
inline constexpr std::array<double, 8> kAspectEdges = {0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
inline constexpr std::array<double, 8> kScaleEdges = {0.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0};

struct DatasetStats {
  std::vector<std::string> class_names;
  std::vector<std::int64_t> class_counts;
  std::array<std::int64_t, kAspectEdges.size()> aspect_hist{};
  std::array<std::int64_t, kScaleEdges.size()> scale_hist{};
  std::int64_t images = 0;
  std::int64_t instances = 0;
};

DatasetStats compute_stats(const Dataset& ds);

/// "section,bin,count" rows: summary, class, aspect, scale.
std::string stats_csv(const DatasetStats& s);

}  // namespace lskdet
