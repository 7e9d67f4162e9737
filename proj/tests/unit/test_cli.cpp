// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "cli_runner.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "lskdet/coco_io.hpp"
#include "lskdet/dataset.hpp"
#include "lskdet/netpbm.hpp"
#include "lskdet/report.hpp"

namespace lskdet {
namespace {

namespace fs = std::filesystem;
using testing_support::fixture;
using testing_support::run_cli;
using testing_support::scratch_dir;

testing_support::CliResult cli(const std::string& args) { return run_cli(LSKDET_CLI_PATH, args); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path write_dataset(const fs::path& dir, int side, int n_images = 1) {
  Dataset ds;
  ds.class_names = {"plane"};
  ds.category_ids = {1};
  for (int i = 0; i < n_images; ++i) {
    AnnotatedImage img;
    img.image_id = i + 1;
    img.file_name = "img" + std::to_string(i + 1) + ".pgm";
    img.width = img.height = side;
    img.split = Split::kVal;
    img.instances.push_back({{10, 10, 60, 40}, 0});
    ds.images.push_back(img);
  }
  const fs::path p = dir / "ann.json";
  write_text_file(p, coco_annotations_json(ds));
  return p;
}

TEST(Cli, CheckPasses) {
  const auto r = cli("check");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  for (const char* suite : {"boxgeom", "activations", "lskblock", "postproc", "evalmap"}) {
    EXPECT_NE(r.output.find(suite), std::string::npos) << suite;
  }
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
}

TEST(Cli, CheckWithZeroToleranceFails) {
  const auto r = cli("check --gradient-tolerance 0");
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("FAIL"), std::string::npos);
}

TEST(Cli, CheckScalarKernelsPass) { EXPECT_EQ(cli("check --isa scalar").exit_code, 0); }

TEST(Cli, CiouPaperWithoutScalarsIsConfigError) {
  const fs::path dir = scratch_dir("cfg");
  write_text_file(dir / "c.yaml", "loss:\n  box: ciou_paper\n");
  const auto r = cli("check --config " + q(dir / "c.yaml"));
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("loss.ciou_alpha"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("loss.ciou_beta"), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(Cli, ConfigWarningsGoToStderr) {
  const fs::path dir = scratch_dir("warn");
  write_text_file(dir / "c.yaml", "training:\n  epochs: 12\nnms:\n  sigmaa: 1\n");
  const auto r = cli("check --config " + q(dir / "c.yaml"));
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("warning: section 'training'"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("nms.sigmaa"), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(Cli, PatchifyMissingFileExitsTwoNamingPath) {
  const auto r = cli("patchify --annotations /no/such/ann.json --out /tmp/unused_lskdet");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("/no/such/ann.json"), std::string::npos) << r.output;
}

TEST(Cli, PatchifyMalformedJsonExitsTwoWithLine) {
  const fs::path dir = scratch_dir("bad");
  write_text_file(dir / "bad.json", "{\n\"images\": [\n}\n");
  const auto r = cli("patchify --annotations " + q(dir / "bad.json") + " --out " + q(dir / "o"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("line"), std::string::npos) << r.output;
  fs::remove_all(dir);
}

TEST(Cli, UsageErrorExitsTwo) {
  EXPECT_EQ(cli("").exit_code, 2);
  EXPECT_EQ(cli("frobnicate").exit_code, 2);
  EXPECT_EQ(cli("eval --gt x.json").exit_code, 2);
}

TEST(Cli, PatchifySingleImageIsIdentity) {
  const fs::path dir = scratch_dir("p800");
  const fs::path ann = write_dataset(dir, 800);
  const auto r = cli("patchify --annotations " + q(ann) + " --out " + q(dir / "out"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const Dataset in = load_coco_annotations(ann), out = load_coco_annotations(dir / "out" / "annotations.json");
  ASSERT_EQ(out.images.size(), 1u);
  EXPECT_EQ(out.images[0].instances, in.images[0].instances);
  EXPECT_EQ(out.images[0].split, Split::kVal);
  EXPECT_TRUE(fs::exists(dir / "out" / "stats.csv"));
  fs::remove_all(dir);
}

TEST(Cli, Patchify1600GivesNinePatchesWithImages) {
  const fs::path dir = scratch_dir("p1600");
  const fs::path ann = write_dataset(dir, 1600);
  ImageData px(1600, 1600, 1);
  for (std::size_t i = 0; i < px.pixels.size(); ++i) px.pixels[i] = static_cast<std::uint8_t>(i % 251);
  fs::create_directories(dir / "images");
  save_netpbm(dir / "images" / "img1.pgm", px);
  const auto r = cli("patchify --annotations " + q(ann) + " --images " + q(dir / "images") + " --out " + q(dir / "out"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const Dataset out = load_coco_annotations(dir / "out" / "annotations.json");
  ASSERT_EQ(out.images.size(), 9u);
  for (const AnnotatedImage& p : out.images) {
    const ImageData tile = load_netpbm(dir / "out" / "images" / p.file_name);
    EXPECT_EQ(tile.width, 800);
    EXPECT_EQ(tile.at(0, 0, 0), px.at(p.offset_y, p.offset_x, 0));
  }
  fs::remove_all(dir);
}

TEST(Cli, EvalFixtureReproducesExpectedReport) {
  const fs::path dir = scratch_dir("eval");
  const auto r = cli("eval --gt " + q(fixture("eval3_gt.json")) + " --dets " + q(fixture("eval3_dets.json")) +
                     " --label Fixture --out " + q(dir / "rep"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(read_text_file(dir / "rep.csv"), read_text_file(fixture("eval3_expected.csv")));
  const auto got = nlohmann::json::parse(read_text_file(dir / "rep.json"));
  const auto want = nlohmann::json::parse(read_text_file(fixture("eval3_expected.json")));
  for (const char* k : {"AP", "AP50", "AP75", "AP_s", "AP_m", "AP_l"}) {
    EXPECT_NEAR(got[k].get<double>(), want[k].get<double>(), 1e-9) << k;
  }
  fs::remove_all(dir);
}

TEST(Cli, EvalPerfectDetectionsAllHundred) {
  const fs::path dir = scratch_dir("perfect");
  const Dataset ds = load_coco_annotations(fixture("eval3_gt.json"));
  DetectionsByImage dets;
  for (const AnnotatedImage& img : ds.images) {
    for (const Instance& inst : img.instances) dets[img.image_id].push_back({inst.box, 1.0, inst.class_id});
  }
  write_text_file(dir / "dets.json", coco_results_json(dets, ds));
  const auto r = cli("eval --gt " + q(fixture("eval3_gt.json")) + " --dets " + q(dir / "dets.json"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = r.output.substr(r.output.find("Data,"));
  const auto rows = parse_results_table_csv(csv);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(*rows[0].report.ap, 100.0);
  EXPECT_EQ(*rows[0].report.ap50, 100.0);
  EXPECT_EQ(*rows[0].report.ap75, 100.0);
  fs::remove_all(dir);
}

TEST(Cli, EvalUnknownCategoryListsOffenders) {
  const fs::path dir = scratch_dir("unknown");
  write_text_file(dir / "dets.json", R"([{"image_id":1,"category_id":77,"bbox":[0,0,1,1],"score":0.5}])");
  const auto r = cli("eval --gt " + q(fixture("eval3_gt.json")) + " --dets " + q(dir / "dets.json"));
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find("77"), std::string::npos) << r.output;
  fs::remove_all(dir);
}

std::map<std::string, std::string> checksums(const std::string& csv) {
  std::map<std::string, std::string> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() == 6) out[f[0] + "/" + f[1] + "/" + f[2]] = f[5];
  }
  return out;
}

TEST(Cli, BenchOneOpOneSize) {
  const auto r = cli("bench --op giou_loss --sizes 10 -k 1");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(checksums(r.output).size(), 1u) << r.output;
}

TEST(Cli, BenchIsDeterministicAcrossRunsAndIsas) {
  const auto a = cli("bench --sizes 10,100 -k 2 --seed 3");
  const auto b = cli("bench --sizes 10,100 -k 2 --seed 3");
  ASSERT_EQ(a.exit_code, 0) << a.output;
  const auto ca = checksums(a.output), cb = checksums(b.output);
  EXPECT_EQ(ca, cb);
  for (const char* op : {"depthwise_plane", "iou_one_to_many", "hardswish"}) {
    for (const char* n : {"10", "100"}) {
      const auto avx = ca.find(std::string(op) + "/avx2/" + n);
      if (avx != ca.end()) EXPECT_EQ(avx->second, ca.at(std::string(op) + "/scalar/" + n)) << op;
    }
  }
}

TEST(Cli, BenchNmsTimingGrowsWithSize) {
  const auto r = cli("bench --op nms --sizes 10,1000 -k 5");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::istringstream in(r.output);
  std::string line;
  std::map<std::string, double> median;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    if (f.size() == 6) median[f[2]] = std::stod(f[4]);
  }
  ASSERT_EQ(median.size(), 2u);
  EXPECT_LT(median["10"], median["1000"]);
}

TEST(Cli, StatsWritesCsv) {
  const auto r = cli("stats --annotations " + q(fixture("eval3_gt.json")));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output.rfind("section,bin,count\n", 0), 0u);
  EXPECT_NE(r.output.find("class,plane,3"), std::string::npos) << r.output;
}

}  // namespace
}  // namespace lskdet
