// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lskdet/activation.hpp"
#include "lskdet/feature_map.hpp"
#include "lskdet/kernel_spec.hpp"

namespace lskdet {

/// Side of the square convolution mapping the 2-channel (mean, max)
/// descriptor to one attention logit map per branch.
inline constexpr int kAttentionKernelSize = 7;

/// Per-channel k x k weights, channel-major.
struct DepthwiseKernel {
  int channels = 0;
  int ksize = 0;
  std::vector<double> weights;

  DepthwiseKernel() = default;
  DepthwiseKernel(int channels, int ksize, double fill = 0.0);

  double& at(int c, int i, int j) { return weights[(static_cast<std::size_t>(c) * ksize + i) * ksize + j]; }
  double at(int c, int i, int j) const { return weights[(static_cast<std::size_t>(c) * ksize + i) * ksize + j]; }
  const double* channel(int c) const { return weights.data() + static_cast<std::size_t>(c) * ksize * ksize; }

  bool operator==(const DepthwiseKernel&) const = default;
};

/// Zero same-padded, stride-1 depthwise correlation. Throws ShapeError when
/// the kernel's channel count differs from the input's.
FeatureMap depthwise_conv(const FeatureMap& input, const DepthwiseKernel& kernel, int dilation);

/// Parameters of spatial kernel selection over `branches` feature maps of
/// `channels` channels each.
struct SelectionParams {
  int branches = 0;
  int channels = 0;
  /// branches x 2 x 7 x 7; input channel 0 is the mean, 1 the max.
  std::vector<double> attn_weight;
  /// branches
  std::vector<double> attn_bias;
  /// channels x channels (out, in), no bias.
  std::vector<double> proj_weight;

  bool operator==(const SelectionParams&) const = default;
};

/// Concatenate, pool (mean, max) across all channels, 7x7 conv to one logit
/// map per branch, sigmoid, weight each branch, sum the branches and project
/// back with a pointwise conv. Throws ShapeError for no inputs or
/// mismatched shapes.
FeatureMap spatial_kernel_selection(std::span<const FeatureMap> features, const SelectionParams& params);

struct LskBlockConfig {
  int channels = 1;
  KernelSpec kernel_spec = default_kernel_spec();
  bool residual = true;
  ActivationKind activation = ActivationKind::kGelu;

  void validate() const;
};

struct LskBlockParams {
  std::vector<DepthwiseKernel> stage_kernels;
  SelectionParams selection;

  bool operator==(const LskBlockParams&) const = default;
};

/// Depthwise kernels and the projection ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
/// attention weights likewise, attention bias 0. Deterministic in `seed`.
LskBlockParams init_lsk_params(const LskBlockConfig& cfg, std::uint64_t seed);

/// Same-shaped, all-zero parameters (a container for gradients).
LskBlockParams zero_lsk_params(const LskBlockConfig& cfg);

/// Throws ShapeError when params do not fit cfg.
void validate_lsk_params(const LskBlockConfig& cfg, const LskBlockParams& params);

/// Intermediate values kept by a forward pass for the backward pass.
struct LskForwardCache {
  bool valid = false;
  LskBlockConfig config;
  FeatureMap input;
  std::vector<FeatureMap> stage_outputs;
  FeatureMap descriptor;           // 2 channels: mean, max
  std::vector<std::int32_t> argmax;  // per pixel: branch * channels + channel
  FeatureMap attention;            // branches channels, post-sigmoid
  FeatureMap selected;             // attention-weighted branch sum
  FeatureMap projected;            // pre-activation
};

/// stages -> selection -> activation, then + input when cfg.residual.
/// Throws ShapeError when the input has the wrong channel count.
FeatureMap lsk_block_forward(const FeatureMap& input, const LskBlockConfig& cfg, const LskBlockParams& params,
                             LskForwardCache* cache = nullptr);

struct LskGradients {
  FeatureMap input;
  LskBlockParams params;
};

/// Reverse-mode gradients of a cached forward pass. Throws Error when the
/// cache is missing, ShapeError when `upstream` does not match the output.
LskGradients lsk_block_backward(const FeatureMap& upstream, const LskForwardCache& cache,
                                const LskBlockParams& params);

/// One pyramid level: average-pool by `downsample`, then one LSK block.
struct FpnStage {
  LskBlockConfig config;
  LskBlockParams params;
  int downsample = 2;
};

struct FpnCache {
  bool valid = false;
  std::vector<FeatureMap> pooled_inputs;
  std::vector<LskForwardCache> blocks;
  std::vector<int> factors;
  std::vector<int> in_heights;
  std::vector<int> in_widths;
};

/// One output per stage, each stage consuming the previous stage's output.
/// Throws ShapeError when a spatial size is not divisible by the cumulative
/// downsample factor or channel counts differ.
std::vector<FeatureMap> fpn_forward(const FeatureMap& input, std::span<const FpnStage> stages,
                                    FpnCache* cache = nullptr);

struct FpnGradients {
  FeatureMap input;
  std::vector<LskBlockParams> stage_params;
};

/// `upstream` holds one gradient per stage output.
FpnGradients fpn_backward(std::span<const FeatureMap> upstream, const FpnCache& cache,
                          std::span<const FpnStage> stages);

FeatureMap avg_pool(const FeatureMap& input, int factor);

}  // namespace lskdet
