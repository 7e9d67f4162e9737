// SPDX-License-Identifier: Apache-2.0
//
// lskdet: patchify, eval, bench, check and stats over the library.
// Exit codes: 0 success, 1 check or evaluation failure, 2 I/O or
// configuration error.
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lskdet/bench.hpp"
#include "lskdet/coco_io.hpp"
#include "lskdet/config.hpp"
#include "lskdet/error.hpp"
#include "lskdet/eval.hpp"
#include "lskdet/netpbm.hpp"
#include "lskdet/patchify.hpp"
#include "lskdet/report.hpp"
#include "lskdet/selfcheck.hpp"
#include "lskdet/simd/kernels.hpp"
#include "lskdet/stats.hpp"

namespace fs = std::filesystem;
using namespace lskdet;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInputError = 2;

/// Flags that override config-file fields.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> nms_mode;
  std::optional<double> nms_iou;
  std::optional<double> nms_sigma;
  std::optional<double> score_floor;
  std::optional<std::string> activation;
  std::optional<std::string> box_loss;
  std::optional<int> proposals;
  std::optional<int> patch_size;
  std::optional<int> stride;
  std::optional<double> min_area_ratio;
  std::optional<double> gradient_tolerance;
  std::optional<std::string> isa;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "YAML run configuration");
    app->add_option("--seed", seed, "Random seed");
    app->add_option("--nms-mode", nms_mode, "hard | soft_gaussian | soft_linear");
    app->add_option("--nms-iou", nms_iou, "NMS IoU threshold");
    app->add_option("--nms-sigma", nms_sigma, "Gaussian Soft-NMS sigma");
    app->add_option("--score-floor", score_floor, "Soft-NMS drop threshold");
    app->add_option("--activation", activation, "mish | hardswish | gelu | gelu_tanh");
    app->add_option("--box-loss", box_loss, "iou | giou | ciou_standard | ciou_paper | smooth_l1");
    app->add_option("--proposals", proposals, "Proposal count N");
    app->add_option("--patch-size", patch_size, "Patch side in pixels");
    app->add_option("--stride", stride, "Patch stride in pixels");
    app->add_option("--min-area-ratio", min_area_ratio, "Instance retention threshold");
    app->add_option("--gradient-tolerance", gradient_tolerance, "Relative error bound of the gradient checks");
    app->add_option("--isa", isa, "Kernel variant: scalar | avx2");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) {
      LoadedConfig loaded = load_run_config(config_path);
      for (const std::string& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
      cfg = loaded.config;
    }
    if (seed) cfg.seed = *seed;
    if (nms_mode) {
      const auto m = parse_nms_mode(*nms_mode);
      if (!m) throw ConfigError("--nms-mode: unknown mode '" + *nms_mode + "'");
      cfg.nms.mode = *m;
    }
    if (nms_iou) cfg.nms.iou_threshold = *nms_iou;
    if (nms_sigma) cfg.nms.sigma = *nms_sigma;
    if (score_floor) cfg.nms.score_floor = *score_floor;
    if (activation) cfg.activation = parse_activation(*activation);
    if (box_loss) {
      const auto b = parse_box_loss(*box_loss);
      if (!b) throw ConfigError("--box-loss: unknown loss '" + *box_loss + "'");
      cfg.loss.box = *b;
    }
    if (proposals) cfg.proposal_count = *proposals;
    if (patch_size) cfg.patch.patch_size = *patch_size;
    if (stride) cfg.patch.stride = *stride;
    if (min_area_ratio) cfg.patch.min_area_ratio = *min_area_ratio;
    if (gradient_tolerance) cfg.gradient_tolerance = *gradient_tolerance;
    if (isa) {
      const auto i = simd::parse_isa(*isa);
      if (!i) throw ConfigError("--isa: unknown variant '" + *isa + "'");
      simd::force_isa(*i);
    }
    cfg.validate();
    return cfg;
  }
};

int cmd_patchify(const RunConfig& cfg, const std::string& annotations, const std::string& images,
                 const std::string& out_dir) {
  Dataset ds = load_coco_annotations(annotations);
  if (!images.empty()) {
    for (AnnotatedImage& img : ds.images) img.pixels = load_netpbm(fs::path(images) / img.file_name);
  }
  const Dataset patched = patchify_dataset(ds, cfg.patch);
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "annotations.json", coco_annotations_json(patched));
  write_text_file(fs::path(out_dir) / "stats.csv", stats_csv(compute_stats(patched)));
  if (!images.empty()) {
    fs::create_directories(fs::path(out_dir) / "images");
    for (const AnnotatedImage& p : patched.images) save_netpbm(fs::path(out_dir) / "images" / p.file_name, *p.pixels);
  }
  std::size_t instances = 0;
  for (const AnnotatedImage& p : patched.images) instances += p.instances.size();
  std::cout << "patchify: " << ds.images.size() << " images -> " << patched.images.size() << " patches, "
            << instances << " instances\n";
  const auto violations = check_split_integrity(patched.images);
  for (const SplitViolation& v : violations) std::cerr << "split violation: " << v.message << "\n";
  return violations.empty() ? 0 : kExitFailure;
}

int cmd_eval(const RunConfig& cfg, const std::string& gt_path, const std::string& det_path, const std::string& out,
             const std::string& label, bool apply_nms) {
  const Dataset ds = load_coco_annotations(gt_path);
  const DetectionsByImage dets = load_coco_results(det_path, ds);
  std::vector<EvalImage> images;
  for (const AnnotatedImage& img : ds.images) {
    EvalImage e;
    e.image_id = img.image_id;
    for (const Instance& inst : img.instances) e.gts.push_back({inst.box, inst.class_id, inst.box.area()});
    if (const auto it = dets.find(img.image_id); it != dets.end()) {
      e.dets = apply_nms ? nms(it->second, cfg.nms) : it->second;
    }
    images.push_back(std::move(e));
  }
  const EvalReport report = evaluate(images, ds.class_names, cfg.eval);
  const std::string json = report_json(report);
  const std::string csv = results_table_csv({{label, report}});
  if (out.empty()) {
    std::cout << json << csv;
  } else {
    write_text_file(out + ".json", json);
    write_text_file(out + ".csv", csv);
    std::cout << csv;
  }
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  bool ok = true;
  for (const SuiteResult& r : run_self_checks(cfg)) {
    std::printf("%-12s %s  (%zu checks) %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.checks, r.detail.c_str());
    ok = ok && r.passed;
  }
  std::printf("kernels: %s\n", std::string(simd::isa_name(simd::kernels().isa)).c_str());
  return ok ? 0 : kExitFailure;
}

int cmd_bench(const RunConfig& cfg, const std::vector<std::size_t>& sizes, int repeats,
              const std::optional<std::string>& op, const std::string& out) {
  const std::string csv = bench_csv(run_bench(cfg, sizes, repeats, op));
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

int cmd_stats(const std::string& annotations, const std::string& out) {
  const std::string csv = stats_csv(compute_stats(load_coco_annotations(annotations)));
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_file(out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-kernel diffusion detector toolkit"};
  app.require_subcommand(1);
  std::function<int()> run;

  Overrides patch_ov;
  std::string annotations;
  std::string images;
  std::string out_dir;
  auto* patch = app.add_subcommand("patchify", "Tile images and annotations into overlapping patches");
  patch->add_option("--annotations", annotations, "COCO-style annotation JSON")->required();
  patch->add_option("--images", images, "Directory of PGM/PPM images (omit for geometry only)");
  patch->add_option("--out", out_dir, "Output directory")->required();
  patch_ov.attach(patch);
  patch->callback([&] { run = [&] { return cmd_patchify(patch_ov.resolve(), annotations, images, out_dir); }; });

  Overrides eval_ov;
  std::string gt_path;
  std::string det_path;
  std::string eval_out;
  std::string label = "Test";
  bool apply_nms = false;
  auto* eval = app.add_subcommand("eval", "COCO-style AP report in results-table format");
  eval->add_option("--gt", gt_path, "Ground-truth annotation JSON")->required();
  eval->add_option("--dets", det_path, "COCO results JSON")->required();
  eval->add_option("--out", eval_out, "Output prefix for .json and .csv (stdout when omitted)");
  eval->add_option("--label", label, "Row label of the CSV report");
  eval->add_flag("--apply-nms", apply_nms, "Run NMS on the detections first");
  eval_ov.attach(eval);
  eval->callback(
      [&] { run = [&] { return cmd_eval(eval_ov.resolve(), gt_path, det_path, eval_out, label, apply_nms); }; });

  Overrides bench_ov;
  std::vector<std::size_t> sizes = {10, 100, 1000};
  int repeats = 5;
  std::optional<std::string> op;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Median-of-k timings as CSV");
  bench->add_option("--sizes", sizes, "Input sizes")->delimiter(',');
  bench->add_option("--repeats,-k", repeats, "Runs per measurement");
  bench->add_option("--op", op, "Only this operation");
  bench->add_option("--out", bench_out, "CSV file (stdout when omitted)");
  bench_ov.attach(bench);
  bench->callback([&] { run = [&] { return cmd_bench(bench_ov.resolve(), sizes, repeats, op, bench_out); }; });

  Overrides check_ov;
  auto* check = app.add_subcommand("check", "Run the built-in verification suites");
  check_ov.attach(check);
  check->callback([&] { run = [&] { return cmd_check(check_ov.resolve()); }; });

  std::string stats_annotations;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Class counts and box shape histograms");
  stats->add_option("--annotations", stats_annotations, "COCO-style annotation JSON")->required();
  stats->add_option("--out", stats_out, "CSV file (stdout when omitted)");
  stats->callback([&] { run = [&] { return cmd_stats(stats_annotations, stats_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
}
