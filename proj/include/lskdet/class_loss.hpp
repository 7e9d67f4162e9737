// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lskdet {

/// Per-class instance counts.
struct ClassHistogram {
  std::vector<std::int64_t> counts;
  std::vector<std::string> class_names;

  std::int64_t total() const;
};

/// The 15 iSAID categories, in the column order of the reporting tables.
const std::vector<std::string>& isaid_class_names();

struct FocalParams {
  double alpha = 0.25;
  double gamma = 2.0;
  std::optional<std::vector<double>> class_weights;

  /// Throws ConfigError when gamma < 0, alpha <= 0 or a weight is non-positive.
  void validate() const;
};

/// -alpha (1 - p_t)^gamma log(p_t). Throws DomainError unless 0 < p_t <= 1.
double focal_loss(double p_t, const FocalParams& params);

/// d focal_loss / d p_t.
double focal_loss_derivative(double p_t, const FocalParams& params);

/// w_c * focal_loss(p_t). Throws ConfigError without class weights and
/// DomainError for an out-of-range class id.
double weighted_focal_loss(double p_t, std::size_t class_id, const FocalParams& params);

struct FocalSample {
  double p_t = 1.0;
  std::size_t class_id = 0;
};

/// Arithmetic mean over the batch; weighted when params carries class weights.
/// An empty batch yields 0.
double mean_focal_loss(std::span<const FocalSample> batch, const FocalParams& params);

/// Inverse-frequency weights total / count_c, optionally rescaled to mean 1.
/// Throws ConfigError for an empty histogram or a zero-count class.
std::vector<double> class_weights_from_histogram(const ClassHistogram& h, bool normalize = true);

}  // namespace lskdet
