// SPDX-License-Identifier: Apache-2.0
#include "lskdet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace lskdet {
namespace {

template <std::size_t N>
std::size_t bin_of(const std::array<double, N>& edges, double v) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - edges.begin()) - 1));
}

std::string edge(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <std::size_t N>
void append_hist(std::string& out, const char* section, const std::array<double, N>& edges,
                 const std::array<std::int64_t, N>& counts) {
  for (std::size_t i = 0; i < N; ++i) {
    const std::string hi = i + 1 < N ? edge(edges[i + 1]) : std::string("inf");
    out += std::string(section) + ",[" + edge(edges[i]) + " " + hi + ")," + std::to_string(counts[i]) + "\n";
  }
}

}  // namespace

DatasetStats compute_stats(const Dataset& ds) {
  DatasetStats s;
  s.class_names = ds.class_names;
  s.class_counts.assign(ds.class_names.size(), 0);
  s.images = static_cast<std::int64_t>(ds.images.size());
  for (const AnnotatedImage& img : ds.images) {
    for (const Instance& inst : img.instances) {
      ++s.instances;
      if (inst.class_id >= 0 && static_cast<std::size_t>(inst.class_id) < s.class_counts.size()) {
        ++s.class_counts[inst.class_id];
      }
      if (inst.box.is_degenerate()) continue;
      const double w = inst.box.width();
      const double h = inst.box.height();
      ++s.aspect_hist[bin_of(kAspectEdges, w / h)];
      ++s.scale_hist[bin_of(kScaleEdges, std::sqrt(w * h))];
    }
  }
  return s;
}

std::string stats_csv(const DatasetStats& s) {
  std::string out = "section,bin,count\n";
  out += "summary,images," + std::to_string(s.images) + "\n";
  out += "summary,instances," + std::to_string(s.instances) + "\n";
  for (std::size_t i = 0; i < s.class_names.size(); ++i) {
    out += "class," + s.class_names[i] + "," + std::to_string(s.class_counts[i]) + "\n";
  }
  append_hist(out, "aspect", kAspectEdges, s.aspect_hist);
  append_hist(out, "scale", kScaleEdges, s.scale_hist);
  return out;
}

}  // namespace lskdet
