// SPDX-License-Identifier: Apache-2.0
//
// Duplicate suppression and aspect-ratio proposal boxes.
#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lskdet/box.hpp"

namespace lskdet {

struct Detection {
  Box box;
  double score = 0.0;
  int class_id = 0;

  bool operator==(const Detection&) const = default;
};

/// Output ordering: score descending, then lower class id, then
/// lexicographic (x1, y1, x2, y2).
bool detection_order(const Detection& a, const Detection& b);

enum class NmsMode { kHard, kSoftGaussian, kSoftLinear };

/// Parses "hard" | "soft_gaussian" | "soft_linear".
std::optional<NmsMode> parse_nms_mode(std::string_view name);
std::string_view to_string(NmsMode mode);

struct NmsConfig {
  NmsMode mode = NmsMode::kHard;
  double iou_threshold = 0.5;
  double sigma = 0.5;
  /// Soft modes only; applied once, after every decay.
  double score_floor = 1e-3;

  /// Throws ConfigError unless 0 < iou_threshold < 1, sigma > 0 and
  /// 0 <= score_floor < 1.
  void validate() const;
};

/// Classes are processed independently. Hard mode keeps a detection unless
/// a kept higher-ranked one of its class overlaps it with IoU > threshold.
/// Soft modes repeatedly take the best remaining detection and decay the
/// rest: s * exp(-IoU^2 / sigma) (Gaussian) or s * (1 - IoU) when IoU > threshold
/// (linear). Boxes and classes are never modified.
std::vector<Detection> nms(std::span<const Detection> dets, const NmsConfig& cfg);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// One box of area base_scale^2 and width/height = r per ratio, centered on
/// `center`: w = s sqrt(r), h = s / sqrt(r). Throws DomainError for an empty
/// list or a non-positive ratio or scale.
std::vector<Box> generate_aspect_boxes(double base_scale, std::span<const double> ratios, Point center);

/// Ratios used by the customized proposal setup.
std::vector<double> default_aspect_ratios();

}  // namespace lskdet
