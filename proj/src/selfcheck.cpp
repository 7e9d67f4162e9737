// SPDX-License-Identifier: Apache-2.0
#include "lskdet/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>

#include "lskdet/box_losses.hpp"
#include "lskdet/diffusion.hpp"
#include "lskdet/eval.hpp"
#include "lskdet/lsk_block.hpp"
#include "lskdet/nms.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet {
namespace {

constexpr double kStep = 1e-5;

double rel_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6}); }

class Tracker {
 public:
  Tracker(std::string name, double tolerance) : tol_(tolerance) { result_.name = std::move(name); }

  void gradient(double analytic, double numeric, const char* what) {
    ++result_.checks;
    const double e = rel_error(analytic, numeric);
    worst_ = std::max(worst_, e);
    if (!(e <= tol_) && result_.passed) {
      result_.passed = false;
      fail_ = std::string(what) + ": analytic " + num(analytic) + " vs numeric " + num(numeric);
    }
  }

  void expect(bool ok, const std::string& what) {
    ++result_.checks;
    if (!ok && result_.passed) {
      result_.passed = false;
      fail_ = what;
    }
  }

  SuiteResult finish(bool report_worst = true) {
    if (!result_.passed) {
      result_.detail = fail_;
    } else if (report_worst) {
      result_.detail = "max rel. error " + num(worst_);
    }
    return result_;
  }

  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }

 private:
  double tol_;
  double worst_ = 0.0;
  std::string fail_;
  SuiteResult result_;
};

/// Box pair away from the max/min switching surfaces of the losses.
std::pair<Box, Box> generic_pair(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 64.0);
  std::uniform_real_distribution<double> size(1.0, 32.0);
  std::uniform_real_distribution<double> shift(-16.0, 16.0);
  while (true) {
    const double cx = pos(rng);
    const double cy = pos(rng);
    const double w = size(rng);
    const double h = size(rng);
    const Box p{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
    const double gx = cx + shift(rng);
    const double gy = cy + shift(rng);
    const double gw = size(rng);
    const double gh = size(rng);
    const Box g{gx - gw / 2, gy - gh / 2, gx + gw / 2, gy + gh / 2};
    const double gaps[] = {p.x1 - g.x1, p.x2 - g.x2, p.x1 - g.x2, p.x2 - g.x1,
                           p.y1 - g.y1, p.y2 - g.y2, p.y1 - g.y2, p.y2 - g.y1};
    bool generic = true;
    for (double d : gaps) generic = generic && std::abs(d) > 1e-3 && std::abs(std::abs(d) - 1.0) > 1e-3;
    if (generic) return {p, g};
  }
}

void check_box_loss(Tracker& t, const char* name, const std::function<BoxLossResult(const Box&)>& f,
                    const Box& pred) {
  const BoxLossResult r = f(pred);
  double* coords[4] = {nullptr, nullptr, nullptr, nullptr};
  Box probe = pred;
  coords[0] = &probe.x1;
  coords[1] = &probe.y1;
  coords[2] = &probe.x2;
  coords[3] = &probe.y2;
  for (int k = 0; k < 4; ++k) {
    const double keep = *coords[k];
    *coords[k] = keep + kStep;
    const double up = f(probe).value;
    *coords[k] = keep - kStep;
    const double down = f(probe).value;
    *coords[k] = keep;
    t.gradient(r.gradient[k], (up - down) / (2 * kStep), name);
  }
}

SuiteResult boxgeom_suite(const RunConfig& cfg) {
  Tracker t("boxgeom", cfg.gradient_tolerance);
  std::mt19937_64 rng(cfg.seed);
  const bool paper_form = cfg.loss.ciou.alpha && cfg.loss.ciou.beta;
  for (int i = 0; i < 200; ++i) {
    const auto [pred, gt] = generic_pair(rng);
    check_box_loss(t, "iou_loss", [&](const Box& b) { return iou_loss(b, gt); }, pred);
    check_box_loss(t, "giou_loss", [&](const Box& b) { return giou_loss(b, gt); }, pred);
    check_box_loss(t, "ciou_loss", [&](const Box& b) { return ciou_loss(b, gt); }, pred);
    check_box_loss(t, "smooth_l1_box", [&](const Box& b) { return smooth_l1_box(b, gt); }, pred);
    if (paper_form) {
      check_box_loss(
          t, "ciou_loss(paper form)",
          [&](const Box& b) { return ciou_loss(b, gt, CiouVariant::kPaperForm, cfg.loss.ciou); }, pred);
    }
    const double l_iou = iou_loss(pred, gt).value;
    const double l_giou = giou_loss(pred, gt).value;
    t.expect(l_giou >= l_iou && l_giou >= 0.0 && l_giou <= 2.0, "giou_loss ordering / range");
    t.expect(ciou_loss(pred, gt).value >= l_iou, "ciou_loss >= iou_loss");
  }
  return t.finish();
}

SuiteResult activation_suite(const RunConfig& cfg) {
  Tracker t("activations", cfg.gradient_tolerance);
  for (ActivationKind kind :
       {ActivationKind::kMish, ActivationKind::kHardswish, ActivationKind::kGelu, ActivationKind::kGeluTanh}) {
    const std::string name = "d " + to_string(kind);
    for (int i = 0; i <= 240; ++i) {
      const double x = -6.0 + 0.05 * i + 0.0123;
      if (kind == ActivationKind::kHardswish && (std::abs(x + 3.0) < 1e-3 || std::abs(x - 3.0) < 1e-3)) continue;
      const double numeric = (activate(kind, x + kStep) - activate(kind, x - kStep)) / (2 * kStep);
      t.gradient(activate_derivative(kind, x), numeric, name.c_str());
    }
  }
  return t.finish();
}

std::vector<double*> param_slots(LskBlockParams& p) {
  std::vector<double*> out;
  for (DepthwiseKernel& k : p.stage_kernels) {
    for (double& w : k.weights) out.push_back(&w);
  }
  for (double& w : p.selection.attn_weight) out.push_back(&w);
  for (double& w : p.selection.attn_bias) out.push_back(&w);
  for (double& w : p.selection.proj_weight) out.push_back(&w);
  return out;
}

SuiteResult lsk_suite(const RunConfig& cfg) {
  Tracker t("lskblock", cfg.gradient_tolerance);
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (bool residual : {true, false}) {
    LskBlockConfig bc;
    bc.channels = 2;
    bc.kernel_spec = cfg.backbone.kernel_spec;
    bc.residual = residual;
    bc.activation = cfg.activation;
    LskBlockParams params = init_lsk_params(bc, cfg.seed + 2);
    for (double* w : param_slots(params)) *w += 0.1 * u(rng);  // non-zero biases too
    FeatureMap input(2, 5, 5);
    for (double& v : input.data()) v = u(rng);
    FeatureMap weights(2, 5, 5);
    for (double& v : weights.data()) v = u(rng);

    auto objective = [&](const FeatureMap& in, const LskBlockParams& p) {
      const FeatureMap out = lsk_block_forward(in, bc, p);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * weights.data()[i];
      return s;
    };
    LskForwardCache cache;
    lsk_block_forward(input, bc, params, &cache);
    LskGradients g = lsk_block_backward(weights, cache, params);

    for (std::size_t i = 0; i < input.size(); ++i) {
      FeatureMap probe = input;
      probe.data()[i] = input.data()[i] + kStep;
      const double up = objective(probe, params);
      probe.data()[i] = input.data()[i] - kStep;
      const double down = objective(probe, params);
      t.gradient(g.input.data()[i], (up - down) / (2 * kStep), "lsk d input");
    }
    LskBlockParams probe = params;
    std::vector<double*> slots = param_slots(probe);
    std::vector<double*> grads = param_slots(g.params);
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const double keep = *slots[i];
      *slots[i] = keep + kStep;
      const double up = objective(input, probe);
      *slots[i] = keep - kStep;
      const double down = objective(input, probe);
      *slots[i] = keep;
      t.gradient(*grads[i], (up - down) / (2 * kStep), "lsk d param");
    }
  }

  LskBlockConfig bc;
  bc.channels = 2;
  bc.kernel_spec = cfg.backbone.kernel_spec;
  bc.activation = cfg.activation;
  FeatureMap input(2, 5, 5);
  for (double& v : input.data()) v = u(rng);
  t.expect(bit_equal(lsk_block_forward(input, bc, zero_lsk_params(bc)), input), "gated block is not the identity");
  return t.finish();
}

SuiteResult postproc_suite(const RunConfig& cfg) {
  Tracker t("postproc", 0.0);
  std::mt19937_64 rng(cfg.seed + 3);
  std::uniform_real_distribution<double> pos(0.0, 40.0);
  std::uniform_real_distribution<double> size(2.0, 20.0);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_int_distribution<int> cls(0, 2);
  NmsConfig hard;
  hard.iou_threshold = cfg.nms.iou_threshold;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> dets(static_cast<std::size_t>(count(rng)));
    for (Detection& d : dets) {
      const double x = pos(rng);
      const double y = pos(rng);
      d = {{x, y, x + size(rng), y + size(rng)}, score(rng), cls(rng)};
    }
    const std::vector<Detection> kept = nms(dets, hard);
    // Fixed point: a detection is kept iff no kept, better-ranked detection
    // of its class overlaps it above the threshold.
    for (const Detection& d : dets) {
      bool suppressed = false;
      for (const Detection& k : kept) {
        if (k.class_id == d.class_id && detection_order(k, d) && iou(k.box, d.box) > hard.iou_threshold) {
          suppressed = true;
        }
      }
      const bool in_kept = std::find(kept.begin(), kept.end(), d) != kept.end();
      t.expect(in_kept != suppressed, "hard NMS is not the greedy fixed point");
    }
    NmsConfig soft = cfg.nms;
    soft.mode = NmsMode::kSoftGaussian;
    for (const Detection& d : nms(dets, soft)) {
      bool found = false;
      for (const Detection& o : dets) {
        found = found || (o.box == d.box && o.class_id == d.class_id && d.score <= o.score);
      }
      t.expect(found, "soft NMS changed a box or raised a score");
    }
  }
  NmsConfig gaussian;
  gaussian.mode = NmsMode::kSoftGaussian;
  gaussian.sigma = 0.5;
  const Detection pair[2] = {{{0, 0, 10, 10}, 0.9, 0}, {{0, 0, 10, 6}, 0.8, 0}};
  const auto decayed = nms(pair, gaussian);
  t.expect(decayed.size() == 2 && std::abs(decayed[1].score - 0.8 * std::exp(-0.72)) < 1e-12,
           "gaussian decay of the two-box case");
  return t.finish(false);
}

SuiteResult evalmap_suite() {
  Tracker t("evalmap", 0.0);
  const ScoredLabel labels[3] = {
      {0.9, MatchLabel::kTruePositive}, {0.8, MatchLabel::kFalsePositive}, {0.7, MatchLabel::kTruePositive}};
  const auto ap = average_precision(labels, 2);
  t.expect(ap && std::abs(*ap - (51.0 + 50.0 * 2.0 / 3.0) / 101.0) < 1e-12, "101-point AP of the three-label case");

  std::vector<EvalImage> images;
  for (int i = 0; i < 3; ++i) {
    EvalImage img;
    img.image_id = i;
    const double s = 10.0 + 50.0 * i;
    img.gts.push_back({{5, 5, 5 + s, 5 + s}, i % 2, s * s});
    img.dets.push_back({{5, 5, 5 + s, 5 + s}, 1.0, i % 2});
    images.push_back(img);
  }
  const std::vector<std::string> names = {"a", "b"};
  const EvalReport r = evaluate(images, names);
  for (auto v : {r.ap, r.ap50, r.ap75, r.ap_small, r.ap_medium, r.ap_large}) {
    t.expect(!v || *v == 100.0, "perfect detections must score 100");
  }
  return t.finish(false);
}

SuiteResult simd_suite(const RunConfig& cfg) {
  Tracker t("simd", 0.0);
  std::mt19937_64 rng(cfg.seed + 4);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const auto& ref = simd::kernels_for(simd::Isa::kScalar);
  for (simd::Isa isa : simd::available_isas()) {
    const auto& k = simd::kernels_for(isa);
    const std::string tag = std::string(simd::isa_name(isa));
    for (int trial = 0; trial < 20; ++trial) {
      const int h = 1 + trial % 9;
      const int w = 1 + (trial * 7) % 23;
      const int ks = 1 + 2 * (trial % 4);
      const int dil = 1 + trial % 3;
      std::vector<double> in(static_cast<std::size_t>(h) * w);
      std::vector<double> kern(static_cast<std::size_t>(ks) * ks);
      for (double& v : in) v = u(rng);
      for (double& v : kern) v = u(rng);
      std::vector<double> a(in.size());
      std::vector<double> b(in.size());
      ref.depthwise_plane(in.data(), h, w, kern.data(), ks, dil, a.data());
      k.depthwise_plane(in.data(), h, w, kern.data(), ks, dil, b.data());
      t.expect(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0, tag + " depthwise mismatch");

      std::vector<Box> boxes(static_cast<std::size_t>(1 + trial));
      for (Box& bx : boxes) bx = Box{u(rng), u(rng), u(rng), u(rng)}.normalized();
      std::vector<double> ia(boxes.size());
      std::vector<double> ib(boxes.size());
      ref.iou_one_to_many(boxes[0], boxes.data(), boxes.size(), ia.data());
      k.iou_one_to_many(boxes[0], boxes.data(), boxes.size(), ib.data());
      t.expect(std::memcmp(ia.data(), ib.data(), ia.size() * sizeof(double)) == 0, tag + " iou mismatch");

      ref.hardswish(in.data(), a.data(), in.size());
      k.hardswish(in.data(), b.data(), in.size());
      t.expect(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0, tag + " hardswish mismatch");
    }
  }
  SuiteResult r = t.finish(false);
  if (r.passed) {
    r.detail = "bit-identical:";
    for (simd::Isa isa : simd::available_isas()) r.detail += " " + std::string(simd::isa_name(isa));
  }
  return r;
}

SuiteResult diffusion_suite(const RunConfig& cfg) {
  Tracker t("diffusion", 0.0);
  const DiffusionSchedule sched = make_cosine_schedule(cfg.diffusion.train_steps, cfg.diffusion.signal_scale);
  Rng rng(cfg.seed + 5);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  ProposalSet targets;
  for (int i = 0; i < 16; ++i) targets.boxes.push_back({u(rng), u(rng), 0.5 * u(rng), 0.5 * u(rng)});
  const FixedTargetDenoiser oracle(targets);
  const std::vector<int> steps = uniform_steps(cfg.diffusion.train_steps, cfg.diffusion.sample_steps);
  const FeatureMap features(1, 1, 1);
  const SampleResult r = sample(oracle, features, sched, steps, targets.size(), rng, cfg.diffusion.renewal_threshold);
  double worst = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const CenterSize& a = r.boxes.boxes[i];
    const CenterSize& b = targets.boxes[i];
    worst = std::max({worst, std::abs(a.cx - b.cx), std::abs(a.cy - b.cy), std::abs(a.w - b.w), std::abs(a.h - b.h)});
  }
  t.expect(worst <= 1e-6, "oracle round trip error " + Tracker::num(worst));
  const ProposalSet same = corrupt(targets, 0, sched, rng);
  t.expect(same.boxes == targets.boxes, "corrupt at t = 0 is not the identity");
  SuiteResult res = t.finish(false);
  if (res.passed) res.detail = "round-trip error " + Tracker::num(worst);
  return res;
}

}  // namespace

std::vector<SuiteResult> run_self_checks(const RunConfig& cfg) {
  cfg.validate();
  return {boxgeom_suite(cfg),  activation_suite(cfg), lsk_suite(cfg),       postproc_suite(cfg),
          evalmap_suite(),     simd_suite(cfg),       diffusion_suite(cfg)};
}

}  // namespace lskdet
