// SPDX-License-Identifier: Apache-2.0
//
// Box diffusion: ground-truth boxes are corrupted toward Gaussian noise in a
// scaled center/size latent space, and random boxes are refined back with
// deterministic DDIM updates driven by a pluggable denoiser.
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lskdet/box.hpp"
#include "lskdet/feature_map.hpp"

namespace lskdet {

using Rng = std::mt19937_64;

struct DiffusionSchedule {
  int num_train_steps = 0;
  /// alphabar[t] for t = 0..T; alphabar[0] = 1, strictly decreasing.
  std::vector<double> alphabar;
  double signal_scale = 2.0;

  double at(int t) const;
  /// Throws ConfigError when the invariants do not hold.
  void validate() const;
};

inline constexpr double kCosineOffset = 0.008;

/// alphabar_t = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) pi/2), s = 0.008.
/// Throws ConfigError for T < 1 or a non-positive scale.
DiffusionSchedule make_cosine_schedule(int num_train_steps, double signal_scale = 2.0);

/// Exactly N boxes in normalized [0,1] center/size form.
struct ProposalSet {
  std::vector<CenterSize> boxes;

  std::size_t size() const { return boxes.size(); }
  /// Corner form, clipped to the unit square.
  std::vector<Box> corner_boxes() const;
};

/// Unclamped scaled coordinates x = (2 box - 1) * signal_scale, one
/// (cx, cy, w, h) row per box.
struct LatentBoxes {
  std::vector<std::array<double, 4>> rows;

  std::size_t size() const { return rows.size(); }
};

LatentBoxes to_latent(const ProposalSet& ps, double signal_scale);
/// Inverse of to_latent, clamping every component to [0, 1].
ProposalSet from_latent(const LatentBoxes& x, double signal_scale);

/// Standard-normal latent rows.
LatentBoxes gaussian_latent(std::size_t n, Rng& rng);

enum class PaddingPolicy {
  /// Fill with boxes drawn from N(0, I) in latent space.
  kNoise,
  /// Repeat ground-truth boxes cyclically (noise when there are none).
  kDuplicate,
};

/// Brings the ground truth (normalized corner boxes) to exactly N proposals:
/// pads when short, keeps the N largest by area (ties by input order) when long.
ProposalSet pad_gt_to_proposals(std::span<const Box> gt, std::size_t n, Rng& rng,
                                PaddingPolicy policy = PaddingPolicy::kNoise);

/// sqrt(ab_t) x + sqrt(1 - ab_t) eps in latent space, mapped back to boxes.
/// t = 0 returns the input unchanged. Throws DomainError for t outside [0, T].
ProposalSet corrupt(const ProposalSet& ps, int t, const DiffusionSchedule& sched, Rng& rng);

/// Latent-space corruption (no clamping).
LatentBoxes corrupt_latent(const LatentBoxes& x0, int t, const DiffusionSchedule& sched, Rng& rng);

/// Deterministic DDIM update from t to t_next given the predicted clean
/// latent. Throws DomainError unless t > t_next >= 0 and t <= T, and
/// ShapeError when the two sets differ in size.
LatentBoxes ddim_step(const LatentBoxes& current, const LatentBoxes& predicted_clean, int t, int t_next,
                      const DiffusionSchedule& sched);

struct DenoiserOutput {
  ProposalSet boxes;
  /// One row of class scores in [0, 1] per box.
  std::vector<std::vector<double>> scores;
};

/// Detection decoder contract: refined boxes and class scores for every
/// proposal. Implementations must tolerate concurrent const calls.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual DenoiserOutput denoise(const ProposalSet& proposals, int t, const FeatureMap& features) const = 0;
};

struct SampleResult {
  ProposalSet boxes;
  std::vector<std::vector<double>> scores;
  /// Boxes replaced by fresh noise, summed over steps.
  std::size_t renewed = 0;
};

/// Iterative refinement from pure noise. `steps` is a strictly descending
/// list of timesteps in [0, T]; a trailing step to 0 is implied. Boxes whose
/// best class score falls below `renewal_threshold` are re-drawn as noise
/// between steps (never after the last one). Throws DomainError for a bad
/// step list and ShapeError when the denoiser changes the cardinality.
SampleResult sample(const Denoiser& denoiser, const FeatureMap& features, const DiffusionSchedule& sched,
                    std::span<const int> steps, std::size_t n, Rng& rng, double renewal_threshold = 0.5);

/// Evenly spaced descending timesteps T, ..., T/k (k entries).
std::vector<int> uniform_steps(int num_train_steps, int count);

/// Reference decoder: mean-pools the feature map inside each box, then a
/// seeded linear head regresses a (cx, cy, w, h) offset and per-class
/// sigmoid scores.
class RoiMeanDenoiser final : public Denoiser {
 public:
  RoiMeanDenoiser(int channels, int num_classes, std::uint64_t seed, double offset_scale = 0.05);

  DenoiserOutput denoise(const ProposalSet& proposals, int t, const FeatureMap& features) const override;

  int channels() const { return channels_; }
  int num_classes() const { return num_classes_; }

 private:
  int channels_;
  int num_classes_;
  double offset_scale_;
  std::vector<double> box_head_;    // 4 x (channels + 1)
  std::vector<double> class_head_;  // classes x (channels + 1)
};

/// Always answers with fixed targets and full confidence, regardless of input.
class FixedTargetDenoiser final : public Denoiser {
 public:
  explicit FixedTargetDenoiser(ProposalSet targets, int num_classes = 1);
  DenoiserOutput denoise(const ProposalSet& proposals, int t, const FeatureMap& features) const override;

 private:
  ProposalSet targets_;
  int num_classes_;
};

}  // namespace lskdet
