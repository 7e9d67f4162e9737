// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "lskdet/config.hpp"
#include "lskdet/error.hpp"

namespace lskdet {
namespace {

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string error_of(const std::string& yaml) {
  try {
    parse_run_config(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, EmptyGivesDefaults) {
  const LoadedConfig c = parse_run_config("");
  EXPECT_TRUE(c.warnings.empty());
  EXPECT_EQ(c.config.activation, ActivationKind::kGelu);
  EXPECT_EQ(c.config.loss.box, BoxLossKind::kGiou);
  EXPECT_EQ(c.config.proposal_count, 300);
  EXPECT_EQ(c.config.patch.patch_size, 800);
  EXPECT_EQ(c.config.patch.stride, 600);
  EXPECT_EQ(c.config.diffusion.train_steps, 1000);
  EXPECT_EQ(c.config.diffusion.sample_steps, 4);
  EXPECT_EQ(c.config.backbone.kernel_spec, default_kernel_spec());
}

TEST(Config, FullDocument) {
  const LoadedConfig c = parse_run_config(R"(
activation: hardswish
seed: 12
loss:
  box: ciou_paper
  class: weighted_focal
  ciou_alpha: 0.5
  ciou_beta: 0.25
  focal_alpha: 0.5
  focal_gamma: 1.5
  normalize_class_weights: false
proposals:
  aspect_ratios: [0.5, 1, 2]
  count: 700
nms:
  mode: soft_gaussian
  iou_threshold: 0.6
  sigma: 0.3
  score_floor: 0.01
diffusion:
  train_steps: 500
  sample_steps: 8
  signal_scale: 1.5
  renewal_threshold: 0.4
backbone:
  channels: 8
  residual: false
  kernel_spec: [[5, 1], [7, 3]]
patch:
  size: 512
  stride: 256
  min_area_ratio: 0.7
eval:
  small_area: 100
  large_area: 1000
  max_dets: 50
check:
  gradient_tolerance: 1e-5
)");
  EXPECT_TRUE(c.warnings.empty());
  const RunConfig& r = c.config;
  EXPECT_EQ(r.activation, ActivationKind::kHardswish);
  EXPECT_EQ(r.seed, 12u);
  EXPECT_EQ(r.loss.box, BoxLossKind::kCiouPaper);
  EXPECT_EQ(r.loss.cls, ClassLossKind::kWeightedFocal);
  EXPECT_EQ(r.loss.ciou.alpha, 0.5);
  EXPECT_FALSE(r.loss.normalize_class_weights);
  EXPECT_EQ(r.aspect_ratios, (std::vector<double>{0.5, 1, 2}));
  EXPECT_EQ(r.proposal_count, 700);
  EXPECT_EQ(r.nms.mode, NmsMode::kSoftGaussian);
  EXPECT_EQ(r.nms.sigma, 0.3);
  EXPECT_EQ(r.diffusion.sample_steps, 8);
  EXPECT_EQ(r.backbone.kernel_spec, (KernelSpec{{{5, 1}, {7, 3}}}));
  EXPECT_FALSE(r.backbone.residual);
  EXPECT_EQ(r.patch.stride, 256);
  EXPECT_EQ(r.eval.max_dets, 50);
  EXPECT_EQ(r.gradient_tolerance, 1e-5);
}

TEST(Config, UnknownKeysAndTrainingWarn) {
  const LoadedConfig c = parse_run_config(R"(
nms:
  mode: hard
  sigmaa: 0.2
training:
  batch_size: 512
  images_per_batch: 3
colour: red
)");
  EXPECT_TRUE(any_contains(c.warnings, "nms.sigmaa"));
  EXPECT_TRUE(any_contains(c.warnings, "colour"));
  EXPECT_TRUE(any_contains(c.warnings, "training"));
  EXPECT_EQ(c.config.nms.sigma, 0.5);
}

TEST(Config, CiouPaperWithoutScalarsNamesBothFields) {
  const std::string msg = error_of("loss:\n  box: ciou_paper\n");
  EXPECT_NE(msg.find("loss.ciou_alpha"), std::string::npos) << msg;
  EXPECT_NE(msg.find("loss.ciou_beta"), std::string::npos) << msg;
}

TEST(Config, BadValuesAreErrors) {
  EXPECT_NE(error_of("activation: relu\n"), "");
  EXPECT_NE(error_of("proposals:\n  count: 0\n"), "");
  EXPECT_NE(error_of("nms:\n  mode: fancy\n"), "");
  EXPECT_NE(error_of("patch:\n  stride: 900\n"), "");
  EXPECT_NE(error_of("backbone:\n  kernel_spec: [[4, 1]]\n"), "");
  EXPECT_NE(error_of("nms:\n  sigma: abc\n"), "");
}

TEST(Config, SyntaxErrorCarriesLine) {
  const std::string msg = error_of("nms:\n  mode: hard\n  sigma: [1, 2\n");
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_THROW(load_run_config("/definitely/not/here.yaml"), IoError);
}

TEST(Config, NameRoundTrips) {
  for (BoxLossKind k : {BoxLossKind::kIou, BoxLossKind::kGiou, BoxLossKind::kCiouStandard, BoxLossKind::kCiouPaper,
                        BoxLossKind::kSmoothL1}) {
    EXPECT_EQ(parse_box_loss(to_string(k)), k);
  }
  EXPECT_EQ(parse_class_loss(to_string(ClassLossKind::kWeightedFocal)), ClassLossKind::kWeightedFocal);
  EXPECT_EQ(parse_box_loss("l1"), std::nullopt);
}

}  // namespace
}  // namespace lskdet
