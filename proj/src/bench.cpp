// SPDX-License-Identifier: Apache-2.0
#include "lskdet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <random>

#include "lskdet/box_losses.hpp"
#include "lskdet/diffusion.hpp"
#include "lskdet/error.hpp"
#include "lskdet/lsk_block.hpp"
#include "lskdet/nms.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet {
namespace {

/// FNV-1a over the bytes of the doubles.
class Checksum {
 public:
  void add(double v) {
    unsigned char bytes[sizeof v];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h_ ^= b;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(std::span<const double> vs) {
    for (double v : vs) add(v);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::vector<Box> random_boxes(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, 512.0);
  std::uniform_real_distribution<double> size(4.0, 64.0);
  std::vector<Box> out(n);
  for (Box& b : out) {
    const double x = pos(rng);
    const double y = pos(rng);
    b = {x, y, x + size(rng), y + size(rng)};
  }
  return out;
}

int side_for(std::size_t n) { return std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))))); }

/// Returns a closure that performs one run and yields its checksum.
using Job = std::function<std::uint64_t()>;

Job make_job(const std::string& op, const RunConfig& cfg, std::size_t n) {
  std::mt19937_64 rng(cfg.seed);
  if (op == "iou_loss" || op == "giou_loss" || op == "ciou_loss" || op == "smooth_l1_box") {
    auto preds = random_boxes(n, rng);
    auto gts = random_boxes(n, rng);
    for (std::size_t i = 0; i < n; ++i) gts[i] = preds[i].translated(4.0, -3.0);
    BoxLossResult (*fn)(const Box&, const Box&) = op == "iou_loss"    ? &iou_loss
                                                  : op == "giou_loss" ? &giou_loss
                                                                      : &smooth_l1_box;
    const bool ciou = op == "ciou_loss";
    return [preds, gts, fn, ciou]() {
      Checksum c;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const BoxLossResult r = ciou ? ciou_loss(preds[i], gts[i]) : fn(preds[i], gts[i]);
        c.add(r.value);
        c.add(r.gradient);
      }
      return c.value();
    };
  }
  if (op == "lsk_forward") {
    LskBlockConfig bc;
    bc.channels = cfg.backbone.channels;
    bc.kernel_spec = cfg.backbone.kernel_spec;
    bc.residual = cfg.backbone.residual;
    bc.activation = cfg.activation;
    const LskBlockParams params = init_lsk_params(bc, cfg.seed);
    const int s = side_for(n);
    FeatureMap input(bc.channels, s, s);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : input.data()) v = u(rng);
    return [bc, params, input]() {
      Checksum c;
      c.add(lsk_block_forward(input, bc, params).data());
      return c.value();
    };
  }
  if (op == "nms") {
    std::vector<Detection> dets;
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, 3);
    for (const Box& b : random_boxes(n, rng)) dets.push_back({b, score(rng), cls(rng)});
    const NmsConfig nc = cfg.nms;
    return [dets, nc]() {
      Checksum c;
      for (const Detection& d : nms(dets, nc)) {
        c.add(d.score);
        c.add(d.box.as_array());
      }
      return c.value();
    };
  }
  if (op == "sample") {
    const DiffusionSchedule sched = make_cosine_schedule(cfg.diffusion.train_steps, cfg.diffusion.signal_scale);
    const std::vector<int> steps = uniform_steps(cfg.diffusion.train_steps, cfg.diffusion.sample_steps);
    const auto denoiser = std::make_shared<RoiMeanDenoiser>(cfg.backbone.channels, 15, cfg.seed);
    FeatureMap features(cfg.backbone.channels, 16, 16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : features.data()) v = u(rng);
    const std::uint64_t seed = cfg.seed;
    const double renewal = cfg.diffusion.renewal_threshold;
    return [=]() {
      Rng local(seed);
      const SampleResult r = sample(*denoiser, features, sched, steps, n, local, renewal);
      Checksum c;
      for (const CenterSize& b : r.boxes.boxes) c.add(std::array<double, 4>{b.cx, b.cy, b.w, b.h});
      return c.value();
    };
  }
  if (op == "depthwise_plane") {
    const int s = side_for(n);
    std::vector<double> in(static_cast<std::size_t>(s) * s);
    std::vector<double> kern(49);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : in) v = u(rng);
    for (double& v : kern) v = u(rng);
    return [in, kern, s]() {
      std::vector<double> out(in.size());
      simd::kernels().depthwise_plane(in.data(), s, s, kern.data(), 7, 3, out.data());
      Checksum c;
      c.add(out);
      return c.value();
    };
  }
  if (op == "iou_one_to_many") {
    const auto boxes = random_boxes(n, rng);
    return [boxes]() {
      std::vector<double> out(boxes.size());
      simd::kernels().iou_one_to_many(boxes[0], boxes.data(), boxes.size(), out.data());
      Checksum c;
      c.add(out);
      return c.value();
    };
  }
  if (op == "hardswish") {
    std::vector<double> in(n);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (double& v : in) v = u(rng);
    return [in]() {
      std::vector<double> out(in.size());
      simd::kernels().hardswish(in.data(), out.data(), in.size());
      Checksum c;
      c.add(out);
      return c.value();
    };
  }
  throw ConfigError("unknown bench op '" + op + "'");
}

bool uses_kernels(const std::string& op) {
  return op == "lsk_forward" || op == "nms" || op == "depthwise_plane" || op == "iou_one_to_many" ||
         op == "hardswish" || op == "sample";
}

BenchRow measure(const std::string& op, const std::string& isa, std::size_t n, int repeats, const Job& job) {
  std::vector<double> times;
  std::uint64_t checksum = 0;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t c = job();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    if (r > 0 && c != checksum) throw Error("bench op " + op + " is not deterministic");
    checksum = c;
  }
  std::sort(times.begin(), times.end());
  const std::size_t m = times.size() / 2;
  const double median = times.size() % 2 ? times[m] : 0.5 * (times[m - 1] + times[m]);
  return {op, isa, n, repeats, median, checksum};
}

}  // namespace

const std::vector<std::string>& bench_ops() {
  static const std::vector<std::string> ops = {"iou_loss", "giou_loss",       "ciou_loss",       "smooth_l1_box",
                                               "lsk_forward", "nms",          "sample",          "depthwise_plane",
                                               "iou_one_to_many", "hardswish"};
  return ops;
}

std::vector<BenchRow> run_bench(const RunConfig& cfg, std::span<const std::size_t> sizes, int repeats,
                                const std::optional<std::string>& op) {
  cfg.validate();
  if (repeats < 1) throw ConfigError("bench repeats must be >= 1");
  std::vector<std::string> ops = bench_ops();
  if (op) {
    if (std::find(ops.begin(), ops.end(), *op) == ops.end()) throw ConfigError("unknown bench op '" + *op + "'");
    ops = {*op};
  }
  for (std::size_t n : sizes) {
    if (n == 0) throw ConfigError("bench sizes must be >= 1");
  }
  std::vector<BenchRow> rows;
  const simd::Isa active = simd::kernels().isa;
  for (const std::string& name : ops) {
    for (std::size_t n : sizes) {
      const Job job = make_job(name, cfg, n);
      if (!uses_kernels(name)) {
        rows.push_back(measure(name, "scalar", n, repeats, job));
        continue;
      }
      for (simd::Isa isa : simd::available_isas()) {
        simd::force_isa(isa);
        rows.push_back(measure(name, std::string(simd::isa_name(isa)), n, repeats, job));
      }
      simd::force_isa(active);
    }
  }
  simd::force_isa(std::nullopt);
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "op,isa,size,repeats,median_us,checksum\n";
  char buf[256];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%d,%.3f,%016llx\n", r.op.c_str(), r.isa.c_str(), r.size, r.repeats,
                  r.median_us, static_cast<unsigned long long>(r.checksum));
    out += buf;
  }
  return out;
}

}  // namespace lskdet
