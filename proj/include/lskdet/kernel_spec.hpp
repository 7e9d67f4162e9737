// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace lskdet {

struct KernelStage {
  int kernel_size = 3;
  int dilation = 1;

  bool operator==(const KernelStage&) const = default;
};

/// Ordered (kernel size, dilation) stages of a large-kernel decomposition.
struct KernelSpec {
  std::vector<KernelStage> stages;

  /// Throws ConfigError for an empty list, even or non-positive kernel
  /// sizes, or non-positive dilations.
  void validate() const;

  bool operator==(const KernelSpec&) const = default;
};

/// (3,1) -> (5,2) -> (7,3).
KernelSpec default_kernel_spec();

/// Support width of the composed stages: 1 + sum (k_i - 1) d_i.
int receptive_field(const KernelSpec& spec);

enum class ParamConvention {
  /// C * sum k_i^2, no bias.
  kDepthwise,
  /// Depthwise plus one C x C pointwise conv per stage.
  kDepthwisePlusPointwise,
  /// Dense convolutions: C^2 * sum k_i^2.
  kFull,
};

/// Weight count of the decomposition under a counting convention. For C = 64
/// none of these yields 11.3K / 60.4K for the default spec and its 29x29
/// equivalent; those figures count layers outside the decomposition.
std::int64_t param_count(const KernelSpec& spec, int channels, ParamConvention convention);

}  // namespace lskdet
