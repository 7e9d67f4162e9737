// SPDX-License-Identifier: Apache-2.0
//
// Built-in verification suites run by `lskdet check`: analytic gradients
// against central differences, NMS against its definition, AP against
// hand values, SIMD kernels against the scalar reference and a diffusion
// round trip. Independent of the unit-test oracles.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lskdet/config.hpp"

namespace lskdet {

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  /// Worst observed error or the first failure.
  std::string detail;
};

/// Suites: boxgeom, activations, lskblock, postproc, evalmap, simd,
/// diffusion. Gradient suites compare |a - n| / max(|a|, |n|, 1e-6) against
/// cfg.gradient_tolerance.
std::vector<SuiteResult> run_self_checks(const RunConfig& cfg);

}  // namespace lskdet
