// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>

namespace lskdet {

enum class ActivationKind {
  kMish,
  kHardswish,
  kGelu,
  /// tanh approximation of GELU; only selectable by its explicit name.
  kGeluTanh,
};

/// "mish" | "hardswish" | "gelu" | "gelu_tanh". Throws ConfigError otherwise.
ActivationKind parse_activation(std::string_view name);
std::string to_string(ActivationKind kind);

/// log(1 + e^x) without overflow.
double softplus(double x);

double activate(ActivationKind kind, double x);

/// Analytic derivative. Hardswish takes the right-hand branch at x = -3 and 3.
double activate_derivative(ActivationKind kind, double x);

/// Element-wise forms; `out` may alias `in`. Hardswish goes through the
/// runtime-selected SIMD kernel.
void activate(ActivationKind kind, std::span<const double> in, std::span<double> out);
void activate_derivative(ActivationKind kind, std::span<const double> in, std::span<double> out);

}  // namespace lskdet
