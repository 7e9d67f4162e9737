// SPDX-License-Identifier: Apache-2.0
#include "lskdet/nms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "lskdet/error.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet {
namespace {

std::map<int, std::vector<Detection>> split_by_class(std::span<const Detection> dets) {
  std::map<int, std::vector<Detection>> groups;
  for (const Detection& d : dets) groups[d.class_id].push_back(d);
  return groups;
}

std::vector<Box> boxes_of(const std::vector<Detection>& dets) {
  std::vector<Box> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) out.push_back(d.box);
  return out;
}

void hard_nms_class(std::vector<Detection> dets, double threshold, std::vector<Detection>& out) {
  std::stable_sort(dets.begin(), dets.end(), detection_order);
  const std::vector<Box> boxes = boxes_of(dets);
  const auto& k = simd::kernels();
  std::vector<char> suppressed(dets.size(), 0);
  std::vector<double> ious(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (suppressed[i]) continue;
    out.push_back(dets[i]);
    const std::size_t rest = dets.size() - i - 1;
    if (rest == 0) break;
    k.iou_one_to_many(boxes[i], boxes.data() + i + 1, rest, ious.data());
    for (std::size_t j = 0; j < rest; ++j) {
      if (ious[j] > threshold) suppressed[i + 1 + j] = 1;
    }
  }
}

void soft_nms_class(std::vector<Detection> dets, const NmsConfig& cfg, std::vector<Detection>& out) {
  const auto& k = simd::kernels();
  std::vector<Box> boxes;
  std::vector<double> ious;
  while (!dets.empty()) {
    auto best = std::min_element(dets.begin(), dets.end(), detection_order);
    std::iter_swap(dets.begin(), best);
    const Detection picked = dets.front();
    out.push_back(picked);
    dets.erase(dets.begin());
    if (dets.empty()) break;
    boxes = boxes_of(dets);
    ious.resize(dets.size());
    k.iou_one_to_many(picked.box, boxes.data(), boxes.size(), ious.data());
    for (std::size_t j = 0; j < dets.size(); ++j) {
      if (cfg.mode == NmsMode::kSoftGaussian) {
        dets[j].score *= std::exp(-(ious[j] * ious[j]) / cfg.sigma);
      } else if (ious[j] > cfg.iou_threshold) {
        dets[j].score *= 1.0 - ious[j];
      }
    }
  }
}

}  // namespace

bool detection_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.class_id != b.class_id) return a.class_id < b.class_id;
  return a.box < b.box;
}

std::optional<NmsMode> parse_nms_mode(std::string_view name) {
  if (name == "hard") return NmsMode::kHard;
  if (name == "soft_gaussian") return NmsMode::kSoftGaussian;
  if (name == "soft_linear") return NmsMode::kSoftLinear;
  return std::nullopt;
}

std::string_view to_string(NmsMode mode) {
  switch (mode) {
    case NmsMode::kHard:
      return "hard";
    case NmsMode::kSoftGaussian:
      return "soft_gaussian";
    case NmsMode::kSoftLinear:
      return "soft_linear";
  }
  return "?";
}

void NmsConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ConfigError("nms iou_threshold must lie in (0, 1), got " + std::to_string(iou_threshold));
  }
  if (!(sigma > 0.0)) throw ConfigError("nms sigma must be positive, got " + std::to_string(sigma));
  if (!(score_floor >= 0.0 && score_floor < 1.0)) {
    throw ConfigError("nms score_floor must lie in [0, 1), got " + std::to_string(score_floor));
  }
}

std::vector<Detection> nms(std::span<const Detection> dets, const NmsConfig& cfg) {
  cfg.validate();
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (auto& [cls, group] : split_by_class(dets)) {
    if (cfg.mode == NmsMode::kHard) {
      hard_nms_class(std::move(group), cfg.iou_threshold, out);
    } else {
      soft_nms_class(std::move(group), cfg, out);
    }
  }
  if (cfg.mode != NmsMode::kHard) {
    std::erase_if(out, [&](const Detection& d) { return d.score < cfg.score_floor; });
  }
  std::stable_sort(out.begin(), out.end(), detection_order);
  return out;
}

std::vector<Box> generate_aspect_boxes(double base_scale, std::span<const double> ratios, Point center) {
  if (ratios.empty()) throw DomainError("aspect ratio list is empty");
  if (!(base_scale > 0.0)) throw DomainError("base scale must be positive");
  std::vector<Box> out;
  out.reserve(ratios.size());
  for (double r : ratios) {
    if (!(r > 0.0)) throw DomainError("aspect ratio must be positive, got " + std::to_string(r));
    const double root = std::sqrt(r);
    const double w = base_scale * root;
    const double h = base_scale / root;
    out.push_back({center.x - 0.5 * w, center.y - 0.5 * h, center.x + 0.5 * w, center.y + 0.5 * h});
  }
  return out;
}

std::vector<double> default_aspect_ratios() { return {0.25, 0.75, 2.0, 4.0}; }

}  // namespace lskdet
