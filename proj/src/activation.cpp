// SPDX-License-Identifier: Apache-2.0
#include "lskdet/activation.hpp"

#include <cmath>
#include <numbers>

#include "lskdet/error.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kGeluTanhC = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kGeluTanhK = 0.044715;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

}  // namespace

ActivationKind parse_activation(std::string_view name) {
  if (name == "mish") return ActivationKind::kMish;
  if (name == "hardswish") return ActivationKind::kHardswish;
  if (name == "gelu") return ActivationKind::kGelu;
  if (name == "gelu_tanh") return ActivationKind::kGeluTanh;
  throw ConfigError("unknown activation '" + std::string(name) + "' (expected mish, hardswish, gelu or gelu_tanh)");
}

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::kMish: return "mish";
    case ActivationKind::kHardswish: return "hardswish";
    case ActivationKind::kGelu: return "gelu";
    case ActivationKind::kGeluTanh: return "gelu_tanh";
  }
  return "unknown";
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double activate(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kMish:
      return x * std::tanh(softplus(x));
    case ActivationKind::kHardswish:
      return simd::hardswish_scalar(x);
    case ActivationKind::kGelu:
      return x * normal_cdf(x);
    case ActivationKind::kGeluTanh: {
      const double u = kGeluTanhC * (x + kGeluTanhK * x * x * x);
      return 0.5 * x * (1.0 + std::tanh(u));
    }
  }
  return 0.0;
}

double activate_derivative(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::kMish: {
      const double t = std::tanh(softplus(x));
      return t + x * (1.0 - t * t) * sigmoid(x);
    }
    case ActivationKind::kHardswish:
      return simd::hardswish_derivative_scalar(x);
    case ActivationKind::kGelu:
      return normal_cdf(x) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
    case ActivationKind::kGeluTanh: {
      const double u = kGeluTanhC * (x + kGeluTanhK * x * x * x);
      const double t = std::tanh(u);
      const double du = kGeluTanhC * (1.0 + 3.0 * kGeluTanhK * x * x);
      return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
    }
  }
  return 0.0;
}

void activate(ActivationKind kind, std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw ShapeError("activation input/output size mismatch");
  if (kind == ActivationKind::kHardswish) {
    simd::kernels().hardswish(in.data(), out.data(), in.size());
    return;
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = activate(kind, in[i]);
}

void activate_derivative(ActivationKind kind, std::span<const double> in, std::span<double> out) {
  if (in.size() != out.size()) throw ShapeError("activation input/output size mismatch");
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = activate_derivative(kind, in[i]);
}

}  // namespace lskdet
