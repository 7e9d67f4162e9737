// SPDX-License-Identifier: Apache-2.0
#include "lskdet/config.hpp"

#include <initializer_list>
#include <set>
#include <yaml-cpp/yaml.h>

#include "lskdet/coco_io.hpp"
#include "lskdet/error.hpp"

namespace lskdet {
namespace {

class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::vector<std::string>& warnings)
      : node_(node), path_(std::move(path)), warnings_(warnings) {
    if (present() && !node_.IsMap()) throw ConfigError(where() + ": expected a mapping");
  }

  /// Emits a warning for each key that was never looked up.
  void finish(std::initializer_list<std::string_view> ignored = {}) {
    if (!present()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (seen_.count(key)) continue;
      bool skip = false;
      for (std::string_view i : ignored) skip = skip || i == key;
      if (!skip) warnings_.push_back("unknown key '" + qualified(key) + "' ignored");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const YAML::Node v = get(key);
    if (!v) return;
    try {
      out = v.template as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(qualified(key) + ": wrong type (line " + std::to_string(v.Mark().line + 1) + ")");
    }
  }

  template <typename T>
  void read_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    const YAML::Node v = get(key);
    if (!v || v.IsNull()) return;
    T value{};
    read(key, value);
    out = value;
  }

  YAML::Node child(const char* key) {
    seen_.insert(key);
    return get(key);
  }

  std::string qualified(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

 private:
  bool present() const { return node_ && !node_.IsNull(); }
  YAML::Node get(const char* key) const {
    static const YAML::Node empty(YAML::NodeType::Map);
    const YAML::Node& n = present() ? node_ : empty;
    return n[key];
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>& warnings_;
  std::set<std::string> seen_;
};

template <typename T, typename Parse>
T parse_name(const std::string& field, const std::string& value, Parse parse, const char* choices) {
  const auto v = parse(value);
  if (!v) throw ConfigError(field + ": unknown value '" + value + "' (expected " + choices + ")");
  return *v;
}

}  // namespace

std::optional<BoxLossKind> parse_box_loss(std::string_view name) {
  if (name == "iou") return BoxLossKind::kIou;
  if (name == "giou") return BoxLossKind::kGiou;
  if (name == "ciou_standard") return BoxLossKind::kCiouStandard;
  if (name == "ciou_paper") return BoxLossKind::kCiouPaper;
  if (name == "smooth_l1") return BoxLossKind::kSmoothL1;
  return std::nullopt;
}

std::string_view to_string(BoxLossKind kind) {
  switch (kind) {
    case BoxLossKind::kIou:
      return "iou";
    case BoxLossKind::kGiou:
      return "giou";
    case BoxLossKind::kCiouStandard:
      return "ciou_standard";
    case BoxLossKind::kCiouPaper:
      return "ciou_paper";
    case BoxLossKind::kSmoothL1:
      return "smooth_l1";
  }
  return "?";
}

std::optional<ClassLossKind> parse_class_loss(std::string_view name) {
  if (name == "focal") return ClassLossKind::kFocal;
  if (name == "weighted_focal") return ClassLossKind::kWeightedFocal;
  return std::nullopt;
}

std::string_view to_string(ClassLossKind kind) {
  return kind == ClassLossKind::kFocal ? "focal" : "weighted_focal";
}

void RunConfig::validate() const {
  if (loss.box == BoxLossKind::kCiouPaper) {
    std::string missing;
    if (!loss.ciou.alpha) missing += "loss.ciou_alpha";
    if (!loss.ciou.beta) missing += std::string(missing.empty() ? "" : ", ") + "loss.ciou_beta";
    if (!missing.empty()) throw ConfigError("loss.box = ciou_paper requires " + missing);
  }
  FocalParams{loss.focal_alpha, loss.focal_gamma, std::nullopt}.validate();
  if (aspect_ratios.empty()) throw ConfigError("proposals.aspect_ratios must not be empty");
  for (double r : aspect_ratios) {
    if (!(r > 0.0)) throw ConfigError("proposals.aspect_ratios entries must be positive");
  }
  if (proposal_count < 1) throw ConfigError("proposals.count must be >= 1");
  nms.validate();
  if (diffusion.train_steps < 1) throw ConfigError("diffusion.train_steps must be >= 1");
  if (diffusion.sample_steps < 1 || diffusion.sample_steps > diffusion.train_steps) {
    throw ConfigError("diffusion.sample_steps must lie in [1, train_steps]");
  }
  if (!(diffusion.signal_scale > 0.0)) throw ConfigError("diffusion.signal_scale must be positive");
  if (!(diffusion.renewal_threshold >= 0.0 && diffusion.renewal_threshold <= 1.0)) {
    throw ConfigError("diffusion.renewal_threshold must lie in [0, 1]");
  }
  if (backbone.channels < 1) throw ConfigError("backbone.channels must be >= 1");
  backbone.kernel_spec.validate();
  patch.validate();
  eval.validate();
  if (!(gradient_tolerance >= 0.0)) throw ConfigError("check.gradient_tolerance must be >= 0");
}

LoadedConfig parse_run_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  LoadedConfig out;
  RunConfig& cfg = out.config;
  if (!root || root.IsNull()) return out;
  auto& warnings = out.warnings;

  Section top(root, "", warnings);
  std::string name = to_string(cfg.activation);
  top.read("activation", name);
  cfg.activation = parse_activation(name);
  top.read("seed", cfg.seed);
  if (top.child("training")) warnings.push_back("section 'training' is accepted but ignored (no training here)");

  Section loss(top.child("loss"), "loss", warnings);
  name = std::string(to_string(cfg.loss.box));
  loss.read("box", name);
  cfg.loss.box = parse_name<BoxLossKind>("loss.box", name, parse_box_loss,
                                         "iou, giou, ciou_standard, ciou_paper, smooth_l1");
  name = std::string(to_string(cfg.loss.cls));
  loss.read("class", name);
  cfg.loss.cls = parse_name<ClassLossKind>("loss.class", name, parse_class_loss, "focal, weighted_focal");
  loss.read_optional("ciou_alpha", cfg.loss.ciou.alpha);
  loss.read_optional("ciou_beta", cfg.loss.ciou.beta);
  loss.read("focal_alpha", cfg.loss.focal_alpha);
  loss.read("focal_gamma", cfg.loss.focal_gamma);
  loss.read("normalize_class_weights", cfg.loss.normalize_class_weights);
  loss.finish();

  Section proposals(top.child("proposals"), "proposals", warnings);
  proposals.read("aspect_ratios", cfg.aspect_ratios);
  proposals.read("count", cfg.proposal_count);
  proposals.finish();

  Section nms(top.child("nms"), "nms", warnings);
  name = std::string(to_string(cfg.nms.mode));
  nms.read("mode", name);
  cfg.nms.mode = parse_name<NmsMode>("nms.mode", name, parse_nms_mode, "hard, soft_gaussian, soft_linear");
  nms.read("iou_threshold", cfg.nms.iou_threshold);
  nms.read("sigma", cfg.nms.sigma);
  nms.read("score_floor", cfg.nms.score_floor);
  nms.finish();

  Section diff(top.child("diffusion"), "diffusion", warnings);
  diff.read("train_steps", cfg.diffusion.train_steps);
  diff.read("sample_steps", cfg.diffusion.sample_steps);
  diff.read("signal_scale", cfg.diffusion.signal_scale);
  diff.read("renewal_threshold", cfg.diffusion.renewal_threshold);
  diff.finish();

  Section bb(top.child("backbone"), "backbone", warnings);
  bb.read("channels", cfg.backbone.channels);
  bb.read("residual", cfg.backbone.residual);
  std::vector<std::vector<int>> stages;
  bb.read("kernel_spec", stages);
  if (!stages.empty()) {
    cfg.backbone.kernel_spec.stages.clear();
    for (const auto& s : stages) {
      if (s.size() != 2) throw ConfigError("backbone.kernel_spec entries must be [kernel_size, dilation]");
      cfg.backbone.kernel_spec.stages.push_back({s[0], s[1]});
    }
  }
  bb.finish();

  Section patch(top.child("patch"), "patch", warnings);
  patch.read("size", cfg.patch.patch_size);
  patch.read("stride", cfg.patch.stride);
  patch.read("min_area_ratio", cfg.patch.min_area_ratio);
  patch.finish();

  Section ev(top.child("eval"), "eval", warnings);
  ev.read("small_area", cfg.eval.small_area);
  ev.read("large_area", cfg.eval.large_area);
  ev.read("max_dets", cfg.eval.max_dets);
  ev.finish();

  Section check(top.child("check"), "check", warnings);
  check.read("gradient_tolerance", cfg.gradient_tolerance);
  check.finish();

  top.finish();
  cfg.validate();
  return out;
}

LoadedConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_run_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace lskdet
