// SPDX-License-Identifier: Apache-2.0
#include "lskdet/simd/kernels.hpp"
#include "simd/kernels_common.hpp"

namespace lskdet::simd::scalar {

void depthwise_plane(const double* in, int height, int width, const double* kernel, int ksize, int dilation,
                     double* out) {
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out[y * width + x] = detail::depthwise_pixel(in, height, width, kernel, ksize, dilation, y, x);
    }
  }
}

void iou_one_to_many(const Box& ref, const Box* boxes, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = detail::iou_pair(ref, boxes[i]);
}

void hardswish(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = hardswish_scalar(in[i]);
}

}  // namespace lskdet::simd::scalar
