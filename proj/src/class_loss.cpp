// SPDX-License-Identifier: Apache-2.0
#include "lskdet/class_loss.hpp"

#include <cmath>
#include <numeric>

#include "lskdet/error.hpp"

namespace lskdet {

std::int64_t ClassHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

const std::vector<std::string>& isaid_class_names() {
  static const std::vector<std::string> names = {
      "ship",          "storage_tank",  "tennis_court", "baseball_diamond",  "basketball_court",
      "ground_track_field", "bridge",   "large_vehicle", "small_vehicle",    "helicopter",
      "swimming_pool", "roundabout",    "soccer_ball_field", "plane",        "harbor",
  };
  return names;
}

void FocalParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("focal alpha must be > 0");
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  if (class_weights) {
    for (std::size_t i = 0; i < class_weights->size(); ++i) {
      if (!((*class_weights)[i] > 0.0)) {
        throw ConfigError("class weight " + std::to_string(i) + " must be > 0");
      }
    }
  }
}

namespace {

void check_probability(double p_t) {
  if (!(p_t > 0.0 && p_t <= 1.0)) {
    throw DomainError("focal loss needs 0 < p_t <= 1, got " + std::to_string(p_t));
  }
}

double class_weight(std::size_t class_id, const FocalParams& params) {
  if (!params.class_weights) throw ConfigError("weighted focal loss requires class_weights");
  if (class_id >= params.class_weights->size()) {
    throw DomainError("class id " + std::to_string(class_id) + " has no weight");
  }
  return (*params.class_weights)[class_id];
}

}  // namespace

double focal_loss(double p_t, const FocalParams& params) {
  params.validate();
  check_probability(p_t);
  if (p_t == 1.0) return 0.0;
  return -params.alpha * std::pow(1.0 - p_t, params.gamma) * std::log(p_t);
}

double focal_loss_derivative(double p_t, const FocalParams& params) {
  params.validate();
  check_probability(p_t);
  const double g = params.gamma;
  if (p_t == 1.0) return g == 0.0 ? -params.alpha : 0.0;
  const double q = 1.0 - p_t;
  // d/dp [-(1-p)^g log p] = g (1-p)^(g-1) log p - (1-p)^g / p
  const double modulating = g == 0.0 ? 0.0 : g * std::pow(q, g - 1.0) * std::log(p_t);
  return params.alpha * (modulating - std::pow(q, g) / p_t);
}

double weighted_focal_loss(double p_t, std::size_t class_id, const FocalParams& params) {
  return class_weight(class_id, params) * focal_loss(p_t, params);
}

double mean_focal_loss(std::span<const FocalSample> batch, const FocalParams& params) {
  if (batch.empty()) return 0.0;
  double sum = 0.0;
  for (const FocalSample& s : batch) {
    sum += params.class_weights ? weighted_focal_loss(s.p_t, s.class_id, params) : focal_loss(s.p_t, params);
  }
  return sum / static_cast<double>(batch.size());
}

std::vector<double> class_weights_from_histogram(const ClassHistogram& h, bool normalize) {
  if (h.counts.empty()) throw ConfigError("class histogram is empty");
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] <= 0) {
      const std::string name = i < h.class_names.size() ? h.class_names[i] : std::to_string(i);
      throw ConfigError("class '" + name +
                        "' has no instances; merge it into a related class or drop it before deriving weights");
    }
  }
  const double total = static_cast<double>(h.total());
  std::vector<double> w(h.counts.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = total / static_cast<double>(h.counts[i]);
  if (normalize) {
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (double& x : w) x /= mean;
  }
  return w;
}

}  // namespace lskdet
