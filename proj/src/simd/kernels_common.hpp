// SPDX-License-Identifier: Apache-2.0
// Per-element bodies shared by the scalar kernels and the AVX2 tails.
#pragma once

#include "lskdet/box.hpp"

namespace lskdet::simd::detail {

inline double depthwise_pixel(const double* in, int height, int width, const double* kernel, int ksize,
                              int dilation, int y, int x) {
  const int r = ksize / 2;
  double acc = 0.0;
  for (int i = 0; i < ksize; ++i) {
    const int yy = y + (i - r) * dilation;
    if (yy < 0 || yy >= height) continue;
    const double* row = in + static_cast<long>(yy) * width;
    for (int j = 0; j < ksize; ++j) {
      const int xx = x + (j - r) * dilation;
      if (xx < 0 || xx >= width) continue;
      acc += kernel[i * ksize + j] * row[xx];
    }
  }
  return acc;
}

// Mirrors the lane semantics of _mm256_min_pd/_mm256_max_pd so that the
// vector path produces the same bits, signed zeros included.
inline double vmin(double a, double b) { return a < b ? a : b; }
inline double vmax(double a, double b) { return a > b ? a : b; }

inline double iou_pair(const Box& ref, const Box& b) {
  double iw = vmin(b.x2, ref.x2) - vmax(b.x1, ref.x1);
  double ih = vmin(b.y2, ref.y2) - vmax(b.y1, ref.y1);
  iw = vmax(iw, 0.0);
  ih = vmax(ih, 0.0);
  const double inter = iw * ih;
  const double area_ref = (ref.x2 - ref.x1) * (ref.y2 - ref.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  const double uni = area_ref + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace lskdet::simd::detail
