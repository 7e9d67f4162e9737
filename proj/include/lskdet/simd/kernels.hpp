// SPDX-License-Identifier: Apache-2.0
//
// Data-parallel inner loops. Every kernel has a scalar reference and,
// where the target allows it, an AVX2 variant; the variant is picked once
// at runtime from the CPU features. The AVX2 code performs the same
// operations in the same order per output element, so the two are
// bit-identical (the build disables FMA contraction for this reason).
#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "lskdet/box.hpp"

namespace lskdet::simd {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
/// Parses "scalar" | "avx2".
std::optional<Isa> parse_isa(std::string_view name);

/// True when the variant is compiled in and the CPU can run it.
bool isa_available(Isa isa);
std::vector<Isa> available_isas();

/// Same-padded, stride-1 correlation of one plane with a k x k kernel
/// dilated by `dilation`. Taps falling outside the plane contribute nothing.
using DepthwisePlaneFn = void (*)(const double* in, int height, int width, const double* kernel, int ksize,
                                  int dilation, double* out);

/// out[i] = iou(ref, boxes[i]).
using IouOneToManyFn = void (*)(const Box& ref, const Box* boxes, std::size_t n, double* out);

/// out[i] = hardswish(in[i]); in and out may alias.
using HardswishFn = void (*)(const double* in, double* out, std::size_t n);

struct KernelTable {
  Isa isa;
  DepthwisePlaneFn depthwise_plane;
  IouOneToManyFn iou_one_to_many;
  HardswishFn hardswish;
};

/// Active table: the best available ISA unless overridden by force_isa()
/// or the LSKDET_ISA environment variable.
const KernelTable& kernels();

/// Table for a specific ISA. Throws ConfigError when it is not available.
const KernelTable& kernels_for(Isa isa);

/// Pins the active table (nullopt restores automatic selection).
void force_isa(std::optional<Isa> isa);

inline double hardswish_scalar(double x) {
  double s = x + 3.0;
  s = s > 0.0 ? s : 0.0;
  s = s < 6.0 ? s : 6.0;
  return x * (s / 6.0);
}

inline double hardswish_derivative_scalar(double x) {
  if (x < -3.0) return 0.0;
  if (x < 3.0) return (2.0 * x + 3.0) / 6.0;
  return 1.0;
}

namespace scalar {
void depthwise_plane(const double* in, int height, int width, const double* kernel, int ksize, int dilation,
                     double* out);
void iou_one_to_many(const Box& ref, const Box* boxes, std::size_t n, double* out);
void hardswish(const double* in, double* out, std::size_t n);
}  // namespace scalar

#if defined(LSKDET_HAVE_AVX2)
namespace avx2 {
void depthwise_plane(const double* in, int height, int width, const double* kernel, int ksize, int dilation,
                     double* out);
void iou_one_to_many(const Box& ref, const Box* boxes, std::size_t n, double* out);
void hardswish(const double* in, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace lskdet::simd
