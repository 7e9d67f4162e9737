// SPDX-License-Identifier: Apache-2.0
#include "lskdet/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lskdet/error.hpp"

namespace lskdet {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_timestep(int t, const DiffusionSchedule& sched, const char* what) {
  if (t < 0 || t > sched.num_train_steps) {
    throw DomainError(std::string(what) + " " + std::to_string(t) + " outside [0, " +
                      std::to_string(sched.num_train_steps) + "]");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double DiffusionSchedule::at(int t) const {
  check_timestep(t, *this, "timestep");
  return alphabar[static_cast<std::size_t>(t)];
}

void DiffusionSchedule::validate() const {
  if (num_train_steps < 1) throw ConfigError("diffusion schedule needs T >= 1");
  if (alphabar.size() != static_cast<std::size_t>(num_train_steps) + 1) {
    throw ConfigError("diffusion schedule must hold T + 1 alphabar values");
  }
  if (alphabar.front() != 1.0) throw ConfigError("alphabar_0 must be 1");
  for (std::size_t t = 1; t < alphabar.size(); ++t) {
    if (!(alphabar[t] < alphabar[t - 1]) || !(alphabar[t] > 0.0)) {
      throw ConfigError("alphabar must be strictly decreasing and positive (violated at t = " + std::to_string(t) +
                        ")");
    }
  }
  if (!(signal_scale > 0.0)) throw ConfigError("signal_scale must be positive");
}

DiffusionSchedule make_cosine_schedule(int num_train_steps, double signal_scale) {
  if (num_train_steps < 1) throw ConfigError("diffusion schedule needs T >= 1, got " + std::to_string(num_train_steps));
  if (!(signal_scale > 0.0)) throw ConfigError("signal_scale must be positive");
  const double s = kCosineOffset;
  const double T = static_cast<double>(num_train_steps);
  auto f = [&](int t) {
    const double c = std::cos(((static_cast<double>(t) / T + s) / (1.0 + s)) * std::numbers::pi / 2.0);
    return c * c;
  };
  DiffusionSchedule sched;
  sched.num_train_steps = num_train_steps;
  sched.signal_scale = signal_scale;
  sched.alphabar.resize(static_cast<std::size_t>(num_train_steps) + 1);
  const double f0 = f(0);
  for (int t = 0; t <= num_train_steps; ++t) sched.alphabar[t] = f(t) / f0;
  sched.alphabar[0] = 1.0;
  return sched;
}

std::vector<Box> ProposalSet::corner_boxes() const {
  std::vector<Box> out;
  out.reserve(boxes.size());
  for (const CenterSize& c : boxes) {
    Box b = from_center_size(c);
    out.push_back({clamp01(b.x1), clamp01(b.y1), clamp01(b.x2), clamp01(b.y2)});
  }
  return out;
}

LatentBoxes to_latent(const ProposalSet& ps, double signal_scale) {
  LatentBoxes x;
  x.rows.reserve(ps.size());
  for (const CenterSize& c : ps.boxes) {
    x.rows.push_back({(2.0 * c.cx - 1.0) * signal_scale, (2.0 * c.cy - 1.0) * signal_scale,
                      (2.0 * c.w - 1.0) * signal_scale, (2.0 * c.h - 1.0) * signal_scale});
  }
  return x;
}

ProposalSet from_latent(const LatentBoxes& x, double signal_scale) {
  ProposalSet ps;
  ps.boxes.reserve(x.size());
  for (const auto& r : x.rows) {
    auto back = [&](double v) { return clamp01((v / signal_scale + 1.0) / 2.0); };
    ps.boxes.push_back({back(r[0]), back(r[1]), back(r[2]), back(r[3])});
  }
  return ps;
}

LatentBoxes gaussian_latent(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  LatentBoxes x;
  x.rows.resize(n);
  for (auto& r : x.rows) {
    for (double& v : r) v = normal(rng);
  }
  return x;
}

ProposalSet pad_gt_to_proposals(std::span<const Box> gt, std::size_t n, Rng& rng, PaddingPolicy policy) {
  if (n < 1) throw DomainError("proposal count must be >= 1");
  ProposalSet ps;
  ps.boxes.reserve(n);
  if (gt.size() >= n) {
    std::vector<std::size_t> order(gt.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (gt.size() > n) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return gt[a].area() > gt[b].area(); });
    }
    for (std::size_t i = 0; i < n; ++i) ps.boxes.push_back(to_center_size(gt[order[i]]));
    return ps;
  }
  for (const Box& b : gt) ps.boxes.push_back(to_center_size(b));
  const std::size_t missing = n - gt.size();
  if (policy == PaddingPolicy::kDuplicate && !gt.empty()) {
    for (std::size_t i = 0; i < missing; ++i) ps.boxes.push_back(ps.boxes[i % gt.size()]);
    return ps;
  }
  // Noise boxes are drawn directly in latent space; the scale only matters
  // for the mapping back, so the conventional default is used.
  const ProposalSet noise = from_latent(gaussian_latent(missing, rng), 2.0);
  ps.boxes.insert(ps.boxes.end(), noise.boxes.begin(), noise.boxes.end());
  return ps;
}

LatentBoxes corrupt_latent(const LatentBoxes& x0, int t, const DiffusionSchedule& sched, Rng& rng) {
  check_timestep(t, sched, "corruption timestep");
  const double ab = sched.alphabar[static_cast<std::size_t>(t)];
  if (ab == 1.0) return x0;
  const double signal = std::sqrt(ab);
  const double noise = std::sqrt(1.0 - ab);
  const LatentBoxes eps = gaussian_latent(x0.size(), rng);
  LatentBoxes out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int k = 0; k < 4; ++k) out.rows[i][k] = signal * x0.rows[i][k] + noise * eps.rows[i][k];
  }
  return out;
}

ProposalSet corrupt(const ProposalSet& ps, int t, const DiffusionSchedule& sched, Rng& rng) {
  check_timestep(t, sched, "corruption timestep");
  if (sched.alphabar[static_cast<std::size_t>(t)] == 1.0) return ps;
  return from_latent(corrupt_latent(to_latent(ps, sched.signal_scale), t, sched, rng), sched.signal_scale);
}

LatentBoxes ddim_step(const LatentBoxes& current, const LatentBoxes& predicted_clean, int t, int t_next,
                      const DiffusionSchedule& sched) {
  check_timestep(t, sched, "timestep");
  check_timestep(t_next, sched, "next timestep");
  if (!(t > t_next)) {
    throw DomainError("DDIM step needs t > t_next, got " + std::to_string(t) + " -> " + std::to_string(t_next));
  }
  if (current.size() != predicted_clean.size()) throw ShapeError("DDIM step: latent and prediction differ in size");

  const double ab = sched.alphabar[static_cast<std::size_t>(t)];
  const double ab_next = sched.alphabar[static_cast<std::size_t>(t_next)];
  const double sqrt_ab = std::sqrt(ab);
  const double sqrt_1m_ab = std::sqrt(1.0 - ab);
  const double sqrt_ab_next = std::sqrt(ab_next);
  const double sqrt_1m_ab_next = std::sqrt(1.0 - ab_next);

  LatentBoxes out = predicted_clean;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int k = 0; k < 4; ++k) {
      const double x0 = predicted_clean.rows[i][k];
      const double eps = (current.rows[i][k] - sqrt_ab * x0) / sqrt_1m_ab;
      out.rows[i][k] = sqrt_ab_next * x0 + sqrt_1m_ab_next * eps;
    }
  }
  return out;
}

SampleResult sample(const Denoiser& denoiser, const FeatureMap& features, const DiffusionSchedule& sched,
                    std::span<const int> steps, std::size_t n, Rng& rng, double renewal_threshold) {
  if (steps.empty()) throw DomainError("sampling needs at least one timestep");
  std::vector<int> seq(steps.begin(), steps.end());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    check_timestep(seq[i], sched, "sampling timestep");
    if (i > 0 && !(seq[i] < seq[i - 1])) throw DomainError("sampling timesteps must be strictly descending");
  }
  if (seq.back() != 0) seq.push_back(0);
  if (seq.size() < 2) throw DomainError("sampling needs a timestep above 0");
  if (n < 1) throw DomainError("proposal count must be >= 1");

  SampleResult result;
  LatentBoxes x = gaussian_latent(n, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t s = 0; s + 1 < seq.size(); ++s) {
    const int t = seq[s];
    const int t_next = seq[s + 1];
    DenoiserOutput out = denoiser.denoise(from_latent(x, sched.signal_scale), t, features);
    if (out.boxes.size() != n || out.scores.size() != n) {
      throw ShapeError("denoiser returned " + std::to_string(out.boxes.size()) + " boxes / " +
                       std::to_string(out.scores.size()) + " score rows for " + std::to_string(n) + " proposals");
    }
    x = ddim_step(x, to_latent(out.boxes, sched.signal_scale), t, t_next, sched);
    if (t_next > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& row = out.scores[i];
        const double best = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
        if (best < renewal_threshold) {
          for (double& v : x.rows[i]) v = normal(rng);
          ++result.renewed;
        }
      }
    }
    result.scores = std::move(out.scores);
  }
  result.boxes = from_latent(x, sched.signal_scale);
  return result;
}

std::vector<int> uniform_steps(int num_train_steps, int count) {
  if (num_train_steps < 1 || count < 1 || count > num_train_steps) {
    throw ConfigError("need 1 <= step count <= T");
  }
  std::vector<int> steps;
  for (int i = 0; i < count; ++i) {
    steps.push_back(static_cast<int>(static_cast<long long>(num_train_steps) * (count - i) / count));
  }
  return steps;
}

RoiMeanDenoiser::RoiMeanDenoiser(int channels, int num_classes, std::uint64_t seed, double offset_scale)
    : channels_(channels), num_classes_(num_classes), offset_scale_(offset_scale) {
  if (channels < 1 || num_classes < 1) throw ConfigError("denoiser needs channels >= 1 and classes >= 1");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(channels + 1));
  std::uniform_real_distribution<double> dist(-bound, bound);
  box_head_.resize(static_cast<std::size_t>(4) * (channels + 1));
  class_head_.resize(static_cast<std::size_t>(num_classes) * (channels + 1));
  for (double& w : box_head_) w = dist(rng);
  for (double& w : class_head_) w = dist(rng);
}

DenoiserOutput RoiMeanDenoiser::denoise(const ProposalSet& proposals, int /*t*/, const FeatureMap& features) const {
  if (features.channels() != channels_) throw ShapeError("denoiser feature channel count mismatch");
  const int h = features.height();
  const int w = features.width();
  DenoiserOutput out;
  out.boxes.boxes.reserve(proposals.size());
  out.scores.reserve(proposals.size());
  std::vector<double> pooled(static_cast<std::size_t>(channels_) + 1);
  const std::vector<Box> corners = proposals.corner_boxes();
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const Box& b = corners[i];
    int x0 = std::clamp(static_cast<int>(std::floor(b.x1 * w)), 0, w - 1);
    int y0 = std::clamp(static_cast<int>(std::floor(b.y1 * h)), 0, h - 1);
    int x1 = std::clamp(static_cast<int>(std::ceil(b.x2 * w)), x0 + 1, w);
    int y1 = std::clamp(static_cast<int>(std::ceil(b.y2 * h)), y0 + 1, h);
    const double inv = 1.0 / static_cast<double>((x1 - x0) * (y1 - y0));
    for (int c = 0; c < channels_; ++c) {
      double acc = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) acc += features.at(c, y, x);
      }
      pooled[c] = acc * inv;
    }
    pooled[channels_] = 1.0;

    auto head = [&](const std::vector<double>& weights, int row) {
      double acc = 0.0;
      const double* wr = weights.data() + static_cast<std::size_t>(row) * (channels_ + 1);
      for (int c = 0; c <= channels_; ++c) acc += wr[c] * pooled[c];
      return acc;
    };
    const CenterSize& p = proposals.boxes[i];
    const double d0 = offset_scale_ * std::tanh(head(box_head_, 0));
    const double d1 = offset_scale_ * std::tanh(head(box_head_, 1));
    const double d2 = offset_scale_ * std::tanh(head(box_head_, 2));
    const double d3 = offset_scale_ * std::tanh(head(box_head_, 3));
    out.boxes.boxes.push_back({clamp01(p.cx + d0), clamp01(p.cy + d1), clamp01(p.w + d2), clamp01(p.h + d3)});

    std::vector<double> scores(num_classes_);
    for (int k = 0; k < num_classes_; ++k) scores[k] = sigmoid(head(class_head_, k));
    out.scores.push_back(std::move(scores));
  }
  return out;
}

FixedTargetDenoiser::FixedTargetDenoiser(ProposalSet targets, int num_classes)
    : targets_(std::move(targets)), num_classes_(num_classes) {}

DenoiserOutput FixedTargetDenoiser::denoise(const ProposalSet& /*proposals*/, int /*t*/,
                                            const FeatureMap& /*features*/) const {
  DenoiserOutput out;
  out.boxes = targets_;
  out.scores.assign(targets_.size(), std::vector<double>(static_cast<std::size_t>(num_classes_), 1.0));
  return out;
}

}  // namespace lskdet
