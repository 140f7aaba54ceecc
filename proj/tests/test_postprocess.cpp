#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "tigernet/postprocess.hpp"

namespace tigernet {
namespace {

Detection det(Box b, double score, std::string image = "img", int cls = 1) {
  return {std::move(image), b, score, cls};
}

TEST(GreedyNms, Examples) {
  const std::vector<Detection> one{det({0, 0, 5, 5}, 0.3)};
  EXPECT_EQ(greedy_nms(one, 0.5), one);
  const std::vector<Detection> twins{det({0, 0, 5, 5}, 0.8), det({0, 0, 5, 5}, 0.9)};
  const auto kept = greedy_nms(twins, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_TRUE(greedy_nms(std::vector<Detection>{}, 0.5).empty());
}

TEST(GreedyNms, CraftedFiveBoxCase) {
  // A chain where suppression is not transitive: 0 kills 1, 1 would kill
  // 2 but is already gone, so 2 survives; 3 sits on its own; 4 duplicates 3.
  const std::vector<Detection> d{det({0, 0, 10, 10}, 0.9), det({2, 0, 12, 10}, 0.8),
                                 det({6, 0, 16, 10}, 0.7), det({40, 40, 50, 50}, 0.6),
                                 det({41, 40, 51, 50}, 0.6)};
  const auto idx = greedy_nms_indices(d, 0.5);
  EXPECT_EQ(idx, (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(idx, oracle::nms_by_subsets(d, 0.5));
}

TEST(GreedyNms, ThresholdIsInclusive) {
  const std::vector<Detection> d{det({0, 0, 2, 2}, 0.9), det({1, 0, 3, 2}, 0.8)};
  EXPECT_EQ(greedy_nms(d, 1.0 / 3.0).size(), 1u);
  EXPECT_EQ(greedy_nms(d, 0.34).size(), 2u);
}

TEST(GreedyNms, BruteForceSuite) {
  std::mt19937_64 rng(500);
  std::uniform_int_distribution<int> count(0, 6);
  const double thresholds[] = {0.3, 0.5, 0.7};
  for (int t = 0; t < 500; ++t) {
    const auto d = test::random_detections(rng, count(rng), "img", t % 2 == 0);
    const double th = thresholds[t % 3];
    const auto idx = greedy_nms_indices(d, th);
    ASSERT_EQ(idx, oracle::nms_by_subsets(d, th)) << "case " << t;
    const auto out = greedy_nms(d, th);
    ASSERT_LE(out.size(), d.size());
    for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(out[k], d[idx[k]]);
    for (std::size_t k = 1; k < out.size(); ++k) EXPECT_GE(out[k - 1].score, out[k].score);
    EXPECT_EQ(greedy_nms(out, th), out) << "idempotence, case " << t;
  }
}

TEST(BlendNms, TwoBoxExample) {
  const std::vector<Detection> d{det({0, 0, 10, 10}, 0.6), det({0, 0, 20, 20}, 0.2)};
  // IoU is 0.25, so the cluster forms at thresholds up to that.
  const auto out = blend_nms(d, 0.25);
  ASSERT_EQ(out.size(), 1u);
  const Box want = oracle::weighted_mean({d[0].box, d[1].box}, {0.6, 0.2});
  EXPECT_DOUBLE_EQ(out[0].box.x_min, 0.0);
  EXPECT_DOUBLE_EQ(out[0].box.y_min, 0.0);
  EXPECT_DOUBLE_EQ(out[0].box.x_max, 12.5);
  EXPECT_DOUBLE_EQ(out[0].box.y_max, 12.5);
  EXPECT_DOUBLE_EQ(out[0].box.x_max, want.x_max);
  EXPECT_EQ(out[0].score, 0.6);
}

TEST(BlendNms, SingletonAndIdenticalCluster) {
  const std::vector<Detection> one{det({1, 2, 3, 4}, 0.4)};
  EXPECT_EQ(blend_nms(one, 0.5), one);
  const std::vector<Detection> same{det({1, 2, 5, 7}, 0.3), det({1, 2, 5, 7}, 0.9),
                                    det({1, 2, 5, 7}, 0.1)};
  const auto out = blend_nms(same, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].box, (Box{1, 2, 5, 7}));
  EXPECT_EQ(out[0].score, 0.9);
}

TEST(BlendNms, ZeroScoreClusterUsesPlainMean) {
  const std::vector<Detection> d{det({0, 0, 10, 10}, 0.0), det({0, 0, 10, 12}, 0.0)};
  const auto out = blend_nms(d, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].box.y_max, 11.0);
}

TEST(BlendNms, PropertySuite) {
  std::mt19937_64 rng(501);
  std::uniform_int_distribution<int> count(0, 6);
  for (int t = 0; t < 500; ++t) {
    const auto d = test::random_detections(rng, count(rng), "img", t % 2 == 0);
    const double th = 0.5;
    const auto clusters = blend_clusters(d, th);
    const auto out = blend_nms(d, th);
    const auto seeds = greedy_nms_indices(d, th);
    ASSERT_EQ(clusters.size(), seeds.size());
    ASSERT_EQ(out.size(), seeds.size());
    std::vector<int> claimed(d.size(), 0);
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const auto& c = clusters[k];
      EXPECT_EQ(c.seed, seeds[k]);
      EXPECT_EQ(out[k].score, d[c.seed].score);
      std::vector<Box> boxes;
      std::vector<double> w;
      for (int m : c.members) {
        ++claimed[m];
        EXPECT_GE(iou(d[m].box, d[c.seed].box), th);
        boxes.push_back(d[m].box);
        w.push_back(d[m].score);
      }
      // Convex hull, coordinate-wise.
      for (const Box* b : {&out[k].box}) {
        double lo[4] = {1e300, 1e300, 1e300, 1e300}, hi[4] = {-1e300, -1e300, -1e300, -1e300};
        for (const auto& m : boxes) {
          const double v[4] = {m.x_min, m.y_min, m.x_max, m.y_max};
          for (int i = 0; i < 4; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
          }
        }
        const double got[4] = {b->x_min, b->y_min, b->x_max, b->y_max};
        for (int i = 0; i < 4; ++i) {
          EXPECT_GE(got[i], lo[i] - 1e-12);
          EXPECT_LE(got[i], hi[i] + 1e-12);
        }
      }
      const Box want = oracle::weighted_mean(boxes, w);
      EXPECT_NEAR(out[k].box.x_min, want.x_min, 1e-12);
      EXPECT_NEAR(out[k].box.y_min, want.y_min, 1e-12);
      EXPECT_NEAR(out[k].box.x_max, want.x_max, 1e-12);
      EXPECT_NEAR(out[k].box.y_max, want.y_max, 1e-12);
      if (c.members.size() == 1) EXPECT_EQ(out[k], d[c.seed]);
    }
    // Every detection lands in exactly one cluster.
    for (int n : claimed) EXPECT_EQ(n, 1);
  }
}

TEST(Suppressors, ScoreScalingKeepsSeeds) {
  std::mt19937_64 rng(502);
  std::uniform_int_distribution<int> count(0, 6);
  for (int t = 0; t < 500; ++t) {
    const auto d = test::random_detections(rng, count(rng), "img", true);
    for (double c : {0.5, 0.25, 0.1}) {
      auto scaled = d;
      for (auto& x : scaled) x.score *= c;
      EXPECT_EQ(greedy_nms_indices(scaled, 0.5), greedy_nms_indices(d, 0.5));
      const auto a = blend_clusters(d, 0.5), b = blend_clusters(scaled, 0.5);
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].seed, b[k].seed);
    }
  }
}

TEST(Suppress, GroupsByImageAndClass) {
  const std::vector<Detection> d{det({0, 0, 10, 10}, 0.9, "b"), det({0, 0, 10, 10}, 0.8, "a"),
                                 det({0, 0, 10, 10}, 0.7, "b", 2), det({1, 0, 10, 10}, 0.6, "b"),
                                 det({0, 0, 10, 10}, 0.95, "a")};
  const auto out = suppress(d, NmsMode::Greedy, 0.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].image_id, "b");
  EXPECT_EQ(out[0].class_id, 1);
  EXPECT_EQ(out[1].image_id, "a");
  EXPECT_EQ(out[1].score, 0.95);
  EXPECT_EQ(out[2].class_id, 2);
  EXPECT_EQ(parse_nms_mode("blend"), NmsMode::Blend);
  EXPECT_STREQ(to_string(NmsMode::Greedy), "greedy");
  EXPECT_THROW(parse_nms_mode("soft"), Error);
}

TEST(Decode, AllBackgroundIsEmpty) {
  const std::vector<Box> anchors{{0, 0, 10, 10}, {5, 5, 15, 15}};
  FlatPredictions p;
  p.logits = RowMatrix<double>(2, 2);
  p.logits << 10, -10, 10, -10;
  p.box = RowMatrix<double>::Zero(2, 4);
  EXPECT_TRUE(decode_detections(p, anchors, 0.05, {20, 20}).empty());
}

TEST(Decode, SingleConfidentAnchorIsClippedAnchor) {
  const std::vector<Box> anchors{{-4, 2, 6, 12}, {5, 5, 15, 15}};
  FlatPredictions p;
  p.logits = RowMatrix<double>(2, 2);
  p.logits << 0, std::log(9.0), 10, -10;
  p.box = RowMatrix<double>::Zero(2, 4);
  const auto out = decode_detections(p, anchors, 0.5, {10, 20}, "x");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].score, 0.9, 1e-12);
  EXPECT_EQ(out[0].box, (Box{0, 2, 6, 10}));
  EXPECT_EQ(out[0].image_id, "x");
}

TEST(Decode, RandomOutputsStayInBoundsAboveThreshold) {
  std::mt19937_64 rng(503);
  std::normal_distribution<double> n(0, 2);
  const auto anchors = flatten(generate_anchors(level_shapes({64, 64})));
  for (int t = 0; t < 1000; ++t) {
    FlatPredictions p;
    const Eigen::Index a = Eigen::Index(anchors.size());
    p.logits = RowMatrix<double>(a, 2);
    p.box = RowMatrix<double>(a, 4);
    // Only a slice of anchors per trial keeps the suite fast.
    p.logits.col(0).setConstant(5.0);
    p.logits.col(1).setConstant(-5.0);
    p.box.setZero();
    for (int k = 0; k < 8; ++k) {
      const Eigen::Index i = Eigen::Index(rng() % std::uint64_t(a));
      p.logits(i, 1) = n(rng) + 5;
      for (int c = 0; c < 4; ++c) p.box(i, c) = n(rng) * 0.5;
    }
    const double th = 0.05 * double(t % 10);
    for (const auto& d : decode_detections(p, anchors, th, {48, 64})) {
      ASSERT_GE(d.score, th);
      ASSERT_LE(d.score, 1.0);
      ASSERT_GE(d.box.x_min, 0);
      ASSERT_GE(d.box.y_min, 0);
      ASSERT_LE(d.box.x_max, 64);
      ASSERT_LE(d.box.y_max, 48);
      ASSERT_TRUE(d.box.valid());
    }
  }
}

TEST(Decode, HeadsFlattenInAnchorOrder) {
  // 1x1 grids at every level, 2 anchors per cell, K=2.
  AnchorConfig cfg;
  cfg.scales = {1.0};
  cfg.ratios = {1.0, 2.0};
  std::vector<Extent2> shapes(6, {1, 1});
  const auto grids = generate_anchors(shapes, cfg);
  std::vector<HeadOutput<double>> heads(6);
  for (int l = 0; l < 6; ++l) {
    heads[l].cls = Tensor3<double>(4, 1, 1);
    heads[l].box = Tensor3<double>(8, 1, 1);
    for (int c = 0; c < 4; ++c) heads[l].cls(c, 0, 0) = 100 * l + c;
    for (int c = 0; c < 8; ++c) heads[l].box(c, 0, 0) = 1000 * l + c;
  }
  const auto flat = flatten_heads(heads, grids, 2);
  ASSERT_EQ(flat.logits.rows(), 12);
  EXPECT_EQ(flat.logits(3, 0), 100 + 2);
  EXPECT_EQ(flat.logits(3, 1), 100 + 3);
  EXPECT_EQ(flat.box(3, 0), 1000 + 4);
  EXPECT_EQ(flat.box(3, 3), 1000 + 7);
  heads[2].box = Tensor3<double>(7, 1, 1);
  EXPECT_THROW(flatten_heads(heads, grids, 2), Error);
}

TEST(Jsonl, RoundTripAndValidation) {
  std::mt19937_64 rng(9);
  auto d = test::random_detections(rng, 50, "im\"g", false);
  d[3].class_id = 4;
  std::stringstream ss;
  write_detections_jsonl(ss, d);
  const auto back = read_detections_jsonl(ss);
  EXPECT_EQ(back, d);

  std::stringstream one;
  write_detections_jsonl(one, std::vector<Detection>{det({1, 2, 3, 4}, 0.5, "a")});
  EXPECT_EQ(one.str(), "{\"image_id\":\"a\",\"bbox\":[1.0,2.0,3.0,4.0],\"score\":0.5,\"class\":1}\n");

  for (const char* bad : {"{\"image_id\":\"a\",\"bbox\":[1,2,3],\"score\":0.5,\"class\":1}",
                          "{\"image_id\":\"a\",\"bbox\":[3,2,1,4],\"score\":0.5,\"class\":1}",
                          "{\"image_id\":\"a\",\"bbox\":[1,2,3,4],\"score\":1.5,\"class\":1}",
                          "{\"image_id\":\"a\",\"bbox\":[1,2,3,4],\"class\":1}", "not json",
                          "[1,2]"}) {
    std::stringstream in(bad);
    EXPECT_THROW(read_detections_jsonl(in), ParseError) << bad;
  }
  std::stringstream blank("\n\n");
  EXPECT_TRUE(read_detections_jsonl(blank).empty());
}

}  // namespace
}  // namespace tigernet
