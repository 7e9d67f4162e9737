// SPDX-License-Identifier: Apache-2.0
//
// Run configuration, read from a YAML file. Every section is optional and
// falls back to the defaults below. Unknown keys and the training-only
// section produce warnings; bad values produce a ConfigError.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lskdet/activation.hpp"
#include "lskdet/box_losses.hpp"
#include "lskdet/class_loss.hpp"
#include "lskdet/eval.hpp"
#include "lskdet/kernel_spec.hpp"
#include "lskdet/nms.hpp"
#include "lskdet/patchify.hpp"

namespace lskdet {

enum class BoxLossKind { kIou, kGiou, kCiouStandard, kCiouPaper, kSmoothL1 };
enum class ClassLossKind { kFocal, kWeightedFocal };

std::optional<BoxLossKind> parse_box_loss(std::string_view name);
std::string_view to_string(BoxLossKind kind);
std::optional<ClassLossKind> parse_class_loss(std::string_view name);
std::string_view to_string(ClassLossKind kind);

struct LossConfig {
  BoxLossKind box = BoxLossKind::kGiou;
  ClassLossKind cls = ClassLossKind::kFocal;
  CiouParams ciou;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  bool normalize_class_weights = true;
};

struct DiffusionConfig {
  int train_steps = 1000;
  int sample_steps = 4;
  double signal_scale = 2.0;
  double renewal_threshold = 0.5;
};

struct BackboneConfig {
  int channels = 4;
  KernelSpec kernel_spec = default_kernel_spec();
  bool residual = true;
};

struct RunConfig {
  ActivationKind activation = ActivationKind::kGelu;
  LossConfig loss;
  std::vector<double> aspect_ratios = default_aspect_ratios();
  int proposal_count = 300;
  NmsConfig nms;
  DiffusionConfig diffusion;
  BackboneConfig backbone;
  PatchSpec patch;
  EvalParams eval;
  std::uint64_t seed = 0;
  double gradient_tolerance = 1e-4;

  /// Cross-field checks (ciou_paper needs both scalars, N >= 1, ...).
  /// Throws ConfigError naming the offending fields.
  void validate() const;
};

struct LoadedConfig {
  RunConfig config;
  std::vector<std::string> warnings;
};

/// Parses and validates. Syntax errors are reported with their line.
LoadedConfig parse_run_config(std::string_view yaml_text);
/// Missing files raise an IoError naming the path.
LoadedConfig load_run_config(const std::filesystem::path& path);

}  // namespace lskdet
