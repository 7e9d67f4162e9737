// SPDX-License-Identifier: Apache-2.0
#include "lskdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "lskdet/error.hpp"

namespace lskdet {
namespace {

constexpr int kRecallPoints = 101;

std::optional<double> mean_present(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> percent(std::optional<double> v) {
  if (!v) return std::nullopt;
  return *v * 100.0;
}

std::string join_ids(const std::set<int>& ids) {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ", ";
    out += std::to_string(id);
  }
  return out;
}

}  // namespace

std::vector<MatchLabel> match_detections(std::span<const Detection> dets, std::span<const GtInstance> gts,
                                         double iou_threshold, AreaRange range) {
  // Visit in-range gts before out-of-range ones, keeping input order otherwise.
  std::vector<std::size_t> order(gts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_partition(order.begin(), order.end(), [&](std::size_t g) { return range.contains(gts[g].area); });

  std::vector<char> taken(gts.size(), 0);
  std::vector<MatchLabel> labels;
  labels.reserve(dets.size());
  for (const Detection& d : dets) {
    double best = iou_threshold;
    std::optional<std::size_t> match;
    for (std::size_t g : order) {
      const GtInstance& gt = gts[g];
      if (taken[g] || gt.class_id != d.class_id) continue;
      const bool ignored = !range.contains(gt.area);
      if (match && range.contains(gts[*match].area) && ignored) break;
      const double v = iou(d.box, gt.box);
      if (v < best || (match && v == best)) continue;
      best = v;
      match = g;
    }
    if (match) {
      taken[*match] = 1;
      labels.push_back(range.contains(gts[*match].area) ? MatchLabel::kTruePositive : MatchLabel::kIgnored);
    } else {
      labels.push_back(range.contains(d.box.area()) ? MatchLabel::kFalsePositive : MatchLabel::kIgnored);
    }
  }
  return labels;
}

std::optional<double> average_precision(std::span<const ScoredLabel> labels, int num_gt) {
  if (num_gt < 0) throw DomainError("num_gt must be >= 0");
  if (num_gt == 0) return std::nullopt;

  std::vector<ScoredLabel> kept;
  kept.reserve(labels.size());
  for (const ScoredLabel& l : labels) {
    if (l.label != MatchLabel::kIgnored) kept.push_back(l);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  std::vector<double> recall(kept.size());
  std::vector<double> precision(kept.size());
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].label == MatchLabel::kTruePositive) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    recall[i] = tp / num_gt;
    precision[i] = tp / (tp + fp);
  }
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double sum = 0.0;
  for (int r = 0; r < kRecallPoints; ++r) {
    const double level = r / 100.0;
    const auto it = std::lower_bound(recall.begin(), recall.end(), level);
    if (it == recall.end()) break;
    sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / kRecallPoints;
}

std::vector<double> EvalParams::coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

void EvalParams::validate() const {
  if (iou_thresholds.empty()) throw ConfigError("eval needs at least one IoU threshold");
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("eval IoU threshold outside (0, 1]: " + std::to_string(t));
  }
  if (max_dets < 1) throw ConfigError("eval max_dets must be >= 1");
  if (!(small_area >= 0.0 && small_area <= large_area)) {
    throw ConfigError("eval area thresholds must satisfy 0 <= small_area <= large_area");
  }
}

EvalReport evaluate(std::span<const EvalImage> images, std::span<const std::string> class_names,
                    const EvalParams& params) {
  params.validate();
  const int num_classes = static_cast<int>(class_names.size());

  std::set<int> bad_det;
  std::set<int> bad_gt;
  std::map<std::int64_t, const EvalImage*> by_id;
  for (const EvalImage& img : images) {
    if (!by_id.emplace(img.image_id, &img).second) {
      throw ShapeError("duplicate image id " + std::to_string(img.image_id) + " in evaluation input");
    }
    for (const Detection& d : img.dets) {
      if (d.class_id < 0 || d.class_id >= num_classes) bad_det.insert(d.class_id);
    }
    for (const GtInstance& g : img.gts) {
      if (g.class_id < 0 || g.class_id >= num_classes) bad_gt.insert(g.class_id);
    }
  }
  if (!bad_det.empty()) throw DomainError("unknown class id(s) in detections: " + join_ids(bad_det));
  if (!bad_gt.empty()) throw DomainError("unknown class id(s) in ground truth: " + join_ids(bad_gt));

  // Per image and class: detections ranked by score, capped at max_dets.
  struct Slice {
    std::vector<Detection> dets;
    std::vector<GtInstance> gts;
  };
  std::vector<std::vector<Slice>> slices(static_cast<std::size_t>(num_classes));
  for (auto& per_class : slices) per_class.resize(by_id.size());
  std::size_t image_index = 0;
  for (const auto& [id, img] : by_id) {
    for (const Detection& d : img->dets) slices[d.class_id][image_index].dets.push_back(d);
    for (const GtInstance& g : img->gts) slices[g.class_id][image_index].gts.push_back(g);
    for (int c = 0; c < num_classes; ++c) {
      auto& dets = slices[c][image_index].dets;
      std::stable_sort(dets.begin(), dets.end(),
                       [](const Detection& a, const Detection& b) { return a.score > b.score; });
      if (dets.size() > static_cast<std::size_t>(params.max_dets)) dets.resize(params.max_dets);
    }
    ++image_index;
  }

  const AreaRange ranges[4] = {
      {},
      {0.0, params.small_area},
      {params.small_area, params.large_area},
      {params.large_area, std::numeric_limits<double>::infinity()},
  };
  const std::size_t num_t = params.iou_thresholds.size();

  // ap_table[bucket][class][threshold]
  std::vector<std::vector<std::vector<std::optional<double>>>> ap_table(
      4, std::vector<std::vector<std::optional<double>>>(num_classes, std::vector<std::optional<double>>(num_t)));
  for (int c = 0; c < num_classes; ++c) {
    for (int a = 0; a < 4; ++a) {
      int num_gt = 0;
      for (const Slice& s : slices[c]) {
        for (const GtInstance& g : s.gts) num_gt += ranges[a].contains(g.area) ? 1 : 0;
      }
      for (std::size_t t = 0; t < num_t; ++t) {
        std::vector<ScoredLabel> labels;
        for (const Slice& s : slices[c]) {
          const auto m = match_detections(s.dets, s.gts, params.iou_thresholds[t], ranges[a]);
          for (std::size_t i = 0; i < m.size(); ++i) labels.push_back({s.dets[i].score, m[i]});
        }
        ap_table[a][c][t] = average_precision(labels, num_gt);
      }
    }
  }

  auto class_mean = [&](int a, int c) { return mean_present(ap_table[a][c]); };
  auto over_classes = [&](int a) {
    std::vector<std::optional<double>> v;
    for (int c = 0; c < num_classes; ++c) v.push_back(class_mean(a, c));
    return percent(mean_present(v));
  };
  auto at_threshold = [&](double thr) -> std::optional<double> {
    for (std::size_t t = 0; t < num_t; ++t) {
      if (std::abs(params.iou_thresholds[t] - thr) < 1e-9) {
        std::vector<std::optional<double>> v;
        for (int c = 0; c < num_classes; ++c) v.push_back(ap_table[0][c][t]);
        return percent(mean_present(v));
      }
    }
    return std::nullopt;
  };

  EvalReport report;
  report.ap = over_classes(0);
  report.ap50 = at_threshold(0.5);
  report.ap75 = at_threshold(0.75);
  report.ap_small = over_classes(1);
  report.ap_medium = over_classes(2);
  report.ap_large = over_classes(3);
  for (int c = 0; c < num_classes; ++c) report.per_class.push_back({class_names[c], percent(class_mean(0, c))});
  return report;
}

}  // namespace lskdet
