// SPDX-License-Identifier: Apache-2.0
#include "lskdet/kernel_spec.hpp"

#include <string>

#include "lskdet/error.hpp"

namespace lskdet {

void KernelSpec::validate() const {
  if (stages.empty()) throw ConfigError("kernel spec has no stages");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const KernelStage& s = stages[i];
    if (s.kernel_size < 1 || s.kernel_size % 2 == 0) {
      throw ConfigError("kernel spec stage " + std::to_string(i) + ": kernel size must be odd and positive, got " +
                        std::to_string(s.kernel_size));
    }
    if (s.dilation < 1) {
      throw ConfigError("kernel spec stage " + std::to_string(i) + ": dilation must be positive, got " +
                        std::to_string(s.dilation));
    }
  }
}

KernelSpec default_kernel_spec() { return KernelSpec{{{3, 1}, {5, 2}, {7, 3}}}; }

int receptive_field(const KernelSpec& spec) {
  spec.validate();
  int rf = 1;
  for (const KernelStage& s : spec.stages) rf += (s.kernel_size - 1) * s.dilation;
  return rf;
}

std::int64_t param_count(const KernelSpec& spec, int channels, ParamConvention convention) {
  spec.validate();
  if (channels < 1) throw ConfigError("channels must be >= 1");
  const std::int64_t c = channels;
  std::int64_t taps = 0;
  for (const KernelStage& s : spec.stages) taps += static_cast<std::int64_t>(s.kernel_size) * s.kernel_size;
  switch (convention) {
    case ParamConvention::kDepthwise:
      return c * taps;
    case ParamConvention::kDepthwisePlusPointwise:
      return c * taps + c * c * static_cast<std::int64_t>(spec.stages.size());
    case ParamConvention::kFull:
      return c * c * taps;
  }
  return 0;
}

}  // namespace lskdet
