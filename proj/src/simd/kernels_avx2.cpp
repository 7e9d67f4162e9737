// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 only; reached exclusively through the dispatch table
// after a CPU feature check.
#include <immintrin.h>

#include "lskdet/simd/kernels.hpp"
#include "simd/kernels_common.hpp"

namespace lskdet::simd::avx2 {

void depthwise_plane(const double* in, int height, int width, const double* kernel, int ksize, int dilation,
                     double* out) {
  const int r = ksize / 2;
  const int reach = r * dilation;
  // Columns whose every horizontal tap lands inside the plane.
  const int lo = reach < width ? reach : width;
  const int hi = width - reach > lo ? width - reach : lo;

  for (int y = 0; y < height; ++y) {
    double* out_row = out + static_cast<long>(y) * width;
    for (int x = 0; x < lo; ++x) out_row[x] = detail::depthwise_pixel(in, height, width, kernel, ksize, dilation, y, x);

    int x = lo;
    for (; x + 4 <= hi; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int i = 0; i < ksize; ++i) {
        const int yy = y + (i - r) * dilation;
        if (yy < 0 || yy >= height) continue;
        const double* row = in + static_cast<long>(yy) * width + x - reach;
        const double* krow = kernel + i * ksize;
        for (int j = 0; j < ksize; ++j) {
          const __m256d v = _mm256_loadu_pd(row + j * dilation);
          acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(krow[j]), v));
        }
      }
      _mm256_storeu_pd(out_row + x, acc);
    }
    for (; x < width; ++x) out_row[x] = detail::depthwise_pixel(in, height, width, kernel, ksize, dilation, y, x);
  }
}

void iou_one_to_many(const Box& ref, const Box* boxes, std::size_t n, double* out) {
  static_assert(sizeof(Box) == 4 * sizeof(double));
  const __m256d zero = _mm256_setzero_pd();
  const __m256d rx1 = _mm256_set1_pd(ref.x1);
  const __m256d ry1 = _mm256_set1_pd(ref.y1);
  const __m256d rx2 = _mm256_set1_pd(ref.x2);
  const __m256d ry2 = _mm256_set1_pd(ref.y2);
  const __m256d area_ref = _mm256_set1_pd((ref.x2 - ref.x1) * (ref.y2 - ref.y1));

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* p = &boxes[i].x1;
    const __m256d b0 = _mm256_loadu_pd(p);
    const __m256d b1 = _mm256_loadu_pd(p + 4);
    const __m256d b2 = _mm256_loadu_pd(p + 8);
    const __m256d b3 = _mm256_loadu_pd(p + 12);
    // 4x4 transpose: AoS boxes -> x1, y1, x2, y2 lanes.
    const __m256d t0 = _mm256_unpacklo_pd(b0, b1);
    const __m256d t1 = _mm256_unpackhi_pd(b0, b1);
    const __m256d t2 = _mm256_unpacklo_pd(b2, b3);
    const __m256d t3 = _mm256_unpackhi_pd(b2, b3);
    const __m256d x1 = _mm256_permute2f128_pd(t0, t2, 0x20);
    const __m256d x2 = _mm256_permute2f128_pd(t0, t2, 0x31);
    const __m256d y1 = _mm256_permute2f128_pd(t1, t3, 0x20);
    const __m256d y2 = _mm256_permute2f128_pd(t1, t3, 0x31);

    __m256d iw = _mm256_sub_pd(_mm256_min_pd(x2, rx2), _mm256_max_pd(x1, rx1));
    __m256d ih = _mm256_sub_pd(_mm256_min_pd(y2, ry2), _mm256_max_pd(y1, ry1));
    iw = _mm256_max_pd(iw, zero);
    ih = _mm256_max_pd(ih, zero);
    const __m256d inter = _mm256_mul_pd(iw, ih);
    const __m256d area_b = _mm256_mul_pd(_mm256_sub_pd(x2, x1), _mm256_sub_pd(y2, y1));
    const __m256d uni = _mm256_sub_pd(_mm256_add_pd(area_ref, area_b), inter);
    const __m256d valid = _mm256_cmp_pd(uni, zero, _CMP_GT_OQ);
    const __m256d ratio = _mm256_div_pd(inter, uni);
    _mm256_storeu_pd(out + i, _mm256_and_pd(valid, ratio));
  }
  for (; i < n; ++i) out[i] = detail::iou_pair(ref, boxes[i]);
}

void hardswish(const double* in, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d six = _mm256_set1_pd(6.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in + i);
    __m256d s = _mm256_add_pd(x, three);
    s = _mm256_max_pd(s, zero);
    s = _mm256_min_pd(s, six);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(x, _mm256_div_pd(s, six)));
  }
  for (; i < n; ++i) out[i] = hardswish_scalar(in[i]);
}

}  // namespace lskdet::simd::avx2
