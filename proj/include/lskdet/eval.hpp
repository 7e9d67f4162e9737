// SPDX-License-Identifier: Apache-2.0
//
// COCO-style box AP: greedy score-order matching, 101-point interpolated
// precision, IoU thresholds 0.50:0.05:0.95 and small/medium/large buckets.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lskdet/nms.hpp"

namespace lskdet {

struct GtInstance {
  Box box;
  int class_id = 0;
  /// Pixel area used for bucketing (COCO "area"; box area when unknown).
  double area = 0.0;
};

/// Ground truth and detections of one image.
struct EvalImage {
  std::int64_t image_id = 0;
  std::vector<GtInstance> gts;
  std::vector<Detection> dets;
};

enum class MatchLabel { kTruePositive, kFalsePositive, kIgnored };

/// Half-open pixel-area interval [lo, hi).
struct AreaRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double area) const { return area >= lo && area < hi; }
};

/// Labels each detection of one image. `dets` must already be sorted by
/// descending score. A detection takes the unmatched same-class gt with the
/// highest IoU >= threshold (first one on ties), preferring gts inside
/// `range`. Matches to out-of-range gts, and unmatched detections whose own
/// area is out of range, are labelled kIgnored.
std::vector<MatchLabel> match_detections(std::span<const Detection> dets, std::span<const GtInstance> gts,
                                         double iou_threshold, AreaRange range = {});

struct ScoredLabel {
  double score = 0.0;
  MatchLabel label = MatchLabel::kFalsePositive;
};

/// 101-point interpolated AP in [0, 1]: the precision envelope sampled at
/// recall 0, 0.01, ..., 1. Ignored labels are skipped. nullopt when
/// num_gt == 0.
std::optional<double> average_precision(std::span<const ScoredLabel> labels, int num_gt);

struct EvalParams {
  double small_area = 32.0 * 32.0;
  double large_area = 96.0 * 96.0;
  /// Per image and class, highest scores first.
  int max_dets = 100;
  std::vector<double> iou_thresholds = coco_iou_thresholds();

  /// Throws ConfigError for empty thresholds, thresholds outside (0, 1],
  /// max_dets < 1 or small_area > large_area.
  void validate() const;
  static std::vector<double> coco_iou_thresholds();
};

struct ClassAp {
  std::string name;
  std::optional<double> ap;

  bool operator==(const ClassAp&) const = default;
};

/// Percentages in [0, 100]; nullopt marks a metric with no ground truth.
struct EvalReport {
  std::optional<double> ap;
  std::optional<double> ap50;
  std::optional<double> ap75;
  std::optional<double> ap_small;
  std::optional<double> ap_medium;
  std::optional<double> ap_large;
  std::vector<ClassAp> per_class;

  bool operator==(const EvalReport&) const = default;
};

/// Class ids index `class_names`. Images are processed in image-id order so
/// the result does not depend on the input order. Throws DomainError naming
/// the offending ids when a detection or gt carries an unknown class, and
/// ShapeError on duplicate image ids.
EvalReport evaluate(std::span<const EvalImage> images, std::span<const std::string> class_names,
                    const EvalParams& params = {});

}  // namespace lskdet
