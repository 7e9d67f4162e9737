// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include "json.hpp"

#include "fixtures.hpp"
#include "lskdet/coco_io.hpp"
#include "lskdet/error.hpp"
#include "lskdet/eval.hpp"
#include "oracles.hpp"

namespace lskdet {
namespace {

using testing_support::eval_images;
using testing_support::fixture;

std::vector<ScoredLabel> labels(std::initializer_list<std::pair<double, bool>> l) {
  std::vector<ScoredLabel> out;
  for (auto [s, tp] : l) out.push_back({s, tp ? MatchLabel::kTruePositive : MatchLabel::kFalsePositive});
  return out;
}

std::vector<EvalImage> random_corpus(oracle::Rng& rng, int images, int classes) {
  std::uniform_real_distribution<double> pos(0, 200), size(5, 120), jitter(-6, 6), score(0, 1);
  std::uniform_int_distribution<int> count(0, 5), cls(0, classes - 1);
  std::vector<EvalImage> out;
  for (int i = 0; i < images; ++i) {
    EvalImage e;
    e.image_id = i + 1;
    for (int g = count(rng); g > 0; --g) {
      const double x = pos(rng), y = pos(rng);
      const Box b{x, y, x + size(rng), y + size(rng)};
      e.gts.push_back({b, cls(rng), b.area()});
      if (score(rng) < 0.8) {
        e.dets.push_back({{b.x1 + jitter(rng), b.y1 + jitter(rng), b.x2 + jitter(rng), b.y2 + jitter(rng)},
                          score(rng), e.gts.back().class_id});
      }
    }
    for (int f = count(rng) / 2; f > 0; --f) {
      const double x = pos(rng), y = pos(rng);
      e.dets.push_back({{x, y, x + size(rng), y + size(rng)}, score(rng), cls(rng)});
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

TEST(AveragePrecision, Examples) {
  EXPECT_DOUBLE_EQ(*average_precision(labels({{0.9, true}, {0.5, true}}), 2), 1.0);
  EXPECT_EQ(*average_precision({}, 3), 0.0);
  EXPECT_NEAR(*average_precision(labels({{0.9, true}, {0.8, false}, {0.7, true}}), 2), 0.83498, 1e-5);
  EXPECT_NEAR(*average_precision(labels({{0.9, true}, {0.8, false}, {0.7, true}}), 2),
              (51 * 1.0 + 50 * (2.0 / 3.0)) / 101, 1e-14);
  EXPECT_EQ(average_precision(labels({{0.9, false}}), 0), std::nullopt);
}

TEST(AveragePrecision, MatchesEnvelopeOracle) {
  oracle::Rng rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> n(0, 30);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ScoredLabel> l;
    std::vector<std::pair<double, oracle::Label>> ol;
    int tp = 0;
    for (int i = n(rng); i > 0; --i) {
      const bool is_tp = u(rng) < 0.5;
      tp += is_tp;
      const double s = u(rng);
      l.push_back({s, is_tp ? MatchLabel::kTruePositive : MatchLabel::kFalsePositive});
      ol.emplace_back(s, is_tp ? oracle::Label::kTp : oracle::Label::kFp);
    }
    const int num_gt = tp + n(rng) % 4 + (tp == 0);
    EXPECT_NEAR(*average_precision(l, num_gt), oracle::ap_101(ol, num_gt), 1e-12);
  }
}

TEST(AveragePrecision, IgnoredLabelsAreSkipped) {
  auto l = labels({{0.9, true}, {0.7, true}});
  const double base = *average_precision(l, 3);
  l.push_back({0.8, MatchLabel::kIgnored});
  EXPECT_EQ(*average_precision(l, 3), base);
}

TEST(Matching, Examples) {
  const std::vector<GtInstance> one{{{0, 0, 10, 10}, 0, 100}};
  const std::vector<Detection> d1{{{0, 0, 10, 9}, 0.9, 0}};
  EXPECT_EQ(match_detections(d1, one, 0.5), std::vector<MatchLabel>{MatchLabel::kTruePositive});
  const std::vector<Detection> d2{{{0, 0, 10, 9}, 0.9, 0}, {{0, 0, 10, 10}, 0.8, 0}};
  EXPECT_EQ(match_detections(d2, one, 0.5),
            (std::vector<MatchLabel>{MatchLabel::kTruePositive, MatchLabel::kFalsePositive}));
  const std::vector<Detection> other_class{{{0, 0, 10, 10}, 0.9, 1}};
  EXPECT_EQ(match_detections(other_class, one, 0.5), std::vector<MatchLabel>{MatchLabel::kFalsePositive});
}

TEST(Matching, EqualsGreedyOracle) {
  oracle::Rng rng(2);
  std::uniform_real_distribution<double> pos(0, 20), size(3, 12), score(0, 1);
  std::uniform_int_distribution<int> n(0, 6), cls(0, 1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Detection> dets;
    std::vector<GtInstance> gts;
    std::vector<oracle::Det> od, og;
    for (int i = n(rng); i > 0; --i) {
      const double x = pos(rng), y = pos(rng);
      const Box b{x, y, x + size(rng), y + size(rng)};
      gts.push_back({b, cls(rng), b.area()});
      og.push_back({{b.x1, b.y1, b.x2, b.y2}, 0, gts.back().class_id});
    }
    for (int i = n(rng); i > 0; --i) {
      const double x = pos(rng), y = pos(rng);
      dets.push_back({{x, y, x + size(rng), y + size(rng)}, score(rng), cls(rng)});
    }
    std::sort(dets.begin(), dets.end(), [](auto& a, auto& b) { return a.score > b.score; });
    for (const Detection& d : dets) od.push_back({{d.box.x1, d.box.y1, d.box.x2, d.box.y2}, d.score, d.class_id});
    const auto got = match_detections(dets, gts, 0.3);
    const auto want = oracle::greedy_match(od, og, 0.3);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      EXPECT_EQ(got[i] == MatchLabel::kTruePositive, want[i] >= 0) << "trial " << trial << " det " << i;
    }
  }
}

TEST(Matching, OutOfRangeGtIsIgnored) {
  const std::vector<GtInstance> gts{{{0, 0, 100, 100}, 0, 10000}};
  const std::vector<Detection> d{{{0, 0, 100, 100}, 0.9, 0}, {{200, 200, 202, 202}, 0.5, 0}};
  const AreaRange small{0, 1024};
  EXPECT_EQ(match_detections(d, gts, 0.5, small),
            (std::vector<MatchLabel>{MatchLabel::kIgnored, MatchLabel::kFalsePositive}));
  const AreaRange large{9216, 1e10};
  EXPECT_EQ(match_detections(d, gts, 0.5, large),
            (std::vector<MatchLabel>{MatchLabel::kTruePositive, MatchLabel::kIgnored}));
}

TEST(Evaluate, HandTracedFixture) {
  const Dataset ds = load_coco_annotations(fixture("eval3_gt.json"));
  const DetectionsByImage dets = load_coco_results(fixture("eval3_dets.json"), ds);
  const EvalReport r = evaluate(eval_images(ds, dets), ds.class_names);
  const auto expect = nlohmann::json::parse(read_text_file(fixture("eval3_expected.json")));
  EXPECT_NEAR(*r.ap, expect["AP"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.ap50, expect["AP50"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.ap75, expect["AP75"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.ap_small, expect["AP_s"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.ap_medium, expect["AP_m"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.ap_large, expect["AP_l"].get<double>(), 1e-9);
  ASSERT_EQ(r.per_class.size(), 2u);
  EXPECT_NEAR(*r.per_class[0].ap, expect["per_class"]["plane"].get<double>(), 1e-9);
  EXPECT_NEAR(*r.per_class[1].ap, expect["per_class"]["ship"].get<double>(), 1e-9);
}

TEST(Evaluate, PerfectDetectionsScoreHundred) {
  oracle::Rng rng(3);
  auto corpus = random_corpus(rng, 20, 4);
  for (EvalImage& e : corpus) {
    e.dets.clear();
    for (const GtInstance& g : e.gts) e.dets.push_back({g.box, 1.0, g.class_id});
  }
  const EvalReport r = evaluate(corpus, names(4));
  for (const auto& m : {r.ap, r.ap50, r.ap75, r.ap_small, r.ap_medium, r.ap_large}) {
    if (m) {
      EXPECT_DOUBLE_EQ(*m, 100.0);
    }
  }
  for (const ClassAp& c : r.per_class) {
    if (c.ap) {
      EXPECT_DOUBLE_EQ(*c.ap, 100.0);
    }
  }
}

TEST(Evaluate, EmptyDetectionsScoreZero) {
  oracle::Rng rng(4);
  auto corpus = random_corpus(rng, 10, 3);
  for (EvalImage& e : corpus) e.dets.clear();
  const EvalReport r = evaluate(corpus, names(3));
  ASSERT_TRUE(r.ap.has_value());
  EXPECT_EQ(*r.ap, 0.0);
  EXPECT_EQ(*r.ap50, 0.0);
}

TEST(Evaluate, AbsentBucketsAreNullopt) {
  std::vector<EvalImage> one(1);
  one[0].image_id = 1;
  one[0].gts.push_back({{0, 0, 10, 10}, 0, 100});
  one[0].dets.push_back({{0, 0, 10, 10}, 0.9, 0});
  const EvalReport r = evaluate(one, names(2));
  EXPECT_EQ(*r.ap_small, 100.0);
  EXPECT_EQ(r.ap_medium, std::nullopt);
  EXPECT_EQ(r.ap_large, std::nullopt);
  EXPECT_EQ(r.per_class[1].ap, std::nullopt);
}

TEST(Evaluate, InvariantUnderMonotoneScoreMaps) {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = random_corpus(rng, 15, 3);
    auto mapped = corpus;
    for (EvalImage& e : mapped) {
      for (Detection& d : e.dets) d.score = std::pow(d.score, 3.0) * 0.5 + 0.1;
    }
    EXPECT_EQ(evaluate(corpus, names(3)), evaluate(mapped, names(3)));
  }
}

TEST(Evaluate, LowScoreFalsePositiveNeverHelps) {
  oracle::Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = random_corpus(rng, 10, 2);
    auto worse = corpus;
    worse[0].dets.push_back({{500, 500, 530, 530}, 0.0, trial % 2});
    const EvalReport a = evaluate(corpus, names(2)), b = evaluate(worse, names(2));
    for (auto [x, y] : {std::pair{a.ap, b.ap}, {a.ap50, b.ap50}, {a.ap75, b.ap75}}) {
      if (x) {
        EXPECT_LE(*y, *x + 1e-12);
      }
    }
    for (std::size_t c = 0; c < a.per_class.size(); ++c) {
      if (a.per_class[c].ap) {
        EXPECT_LE(*b.per_class[c].ap, *a.per_class[c].ap + 1e-12);
      }
    }
  }
}

TEST(Evaluate, Ap50DominatesAp) {
  oracle::Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const EvalReport r = evaluate(random_corpus(rng, 12, 3), names(3));
    if (r.ap) {
      EXPECT_GE(*r.ap50, *r.ap);
      EXPECT_GE(*r.ap, 0.0);
    }
  }
}

TEST(Evaluate, ClassRemovalLeavesOthersBitIdentical) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto corpus = random_corpus(rng, 12, 3);
    auto pruned = corpus;
    for (EvalImage& e : pruned) {
      std::erase_if(e.gts, [](const GtInstance& g) { return g.class_id == 1; });
      std::erase_if(e.dets, [](const Detection& d) { return d.class_id == 1; });
    }
    const EvalReport a = evaluate(corpus, names(3)), b = evaluate(pruned, names(3));
    EXPECT_EQ(a.per_class[0], b.per_class[0]);
    EXPECT_EQ(a.per_class[2], b.per_class[2]);
  }
}

TEST(Evaluate, ImageOrderIndependent) {
  oracle::Rng rng(9);
  auto corpus = random_corpus(rng, 25, 3);
  const EvalReport a = evaluate(corpus, names(3));
  std::shuffle(corpus.begin(), corpus.end(), rng);
  for (EvalImage& e : corpus) std::shuffle(e.dets.begin(), e.dets.end(), rng);
  EXPECT_EQ(a, evaluate(corpus, names(3)));
}

TEST(Evaluate, MaxDetsCapsPerImageAndClass) {
  std::vector<EvalImage> one(1);
  one[0].image_id = 1;
  one[0].gts.push_back({{0, 0, 10, 10}, 0, 100});
  for (int i = 0; i < 3; ++i) one[0].dets.push_back({{50.0 + i, 50, 60.0 + i, 60}, 0.9 - 0.1 * i, 0});
  one[0].dets.push_back({{0, 0, 10, 10}, 0.1, 0});
  EvalParams p;
  p.max_dets = 3;
  EXPECT_EQ(*evaluate(one, names(1), p).ap, 0.0);
  p.max_dets = 4;
  EXPECT_GT(*evaluate(one, names(1), p).ap, 0.0);
}

TEST(Evaluate, Errors) {
  std::vector<EvalImage> bad(1);
  bad[0].image_id = 1;
  bad[0].dets.push_back({{0, 0, 1, 1}, 0.5, 7});
  EXPECT_THROW(evaluate(bad, names(2)), DomainError);
  std::vector<EvalImage> dup(2);
  EXPECT_THROW(evaluate(dup, names(2)), ShapeError);
  EvalParams p;
  p.iou_thresholds.clear();
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(EvalParams, CocoThresholds) {
  const auto t = EvalParams::coco_iou_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_EQ(t.front(), 0.5);
  EXPECT_EQ(t[5], 0.75);
  EXPECT_EQ(t.back(), 0.95);
}

}  // namespace
}  // namespace lskdet
