#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"
#include "tigernet/anchors.hpp"

namespace tigernet {
namespace {

TEST(Iou, Examples) {
  const Box a{0, 0, 2, 2}, b{1, 0, 3, 2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{5, 5, 6, 6}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, b), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(Box{1, 1, 1, 1}, Box{1, 1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{2, 0, 4, 2}), 0.0);
}

TEST(Iou, SymmetryTranslationAndOracle) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> shift(-50, 50);
  for (int t = 0; t < 2000; ++t) {
    const Box a = test::random_box(rng, 30), b = test::random_box(rng, 30);
    EXPECT_EQ(iou(a, b), iou(b, a));
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(v, oracle::overlap(a, b), 1e-12);
    // Integer shifts keep the arithmetic exact enough to compare tightly.
    const double dx = std::round(shift(rng)), dy = std::round(shift(rng));
    const Box as{a.x_min + dx, a.y_min + dy, a.x_max + dx, a.y_max + dy};
    const Box bs{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
    EXPECT_NEAR(iou(as, bs), v, 1e-9);
  }
}

TEST(Anchors, TwoByTwoLevel) {
  const auto grid = generate_level(0, 2, 2, 8, 8.0, {1.0}, {1.0});
  ASSERT_EQ(grid.anchors.size(), 4u);
  const std::vector<Box> want{{0, 0, 8, 8}, {8, 0, 16, 8}, {0, 8, 8, 16}, {8, 8, 16, 16}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(grid.anchors[i].x_min, want[i].x_min);
    EXPECT_DOUBLE_EQ(grid.anchors[i].y_min, want[i].y_min);
    EXPECT_DOUBLE_EQ(grid.anchors[i].x_max, want[i].x_max);
    EXPECT_DOUBLE_EQ(grid.anchors[i].y_max, want[i].y_max);
  }
  EXPECT_DOUBLE_EQ(grid.anchors[3].center_x(), 12);
  EXPECT_DOUBLE_EQ(grid.anchors[3].center_y(), 12);
}

TEST(Anchors, CountsAt256) {
  const auto shapes = level_shapes({256, 256});
  ASSERT_EQ(shapes.size(), 6u);
  const auto grids = generate_anchors(shapes);
  EXPECT_EQ(grids[0].anchors.size(), 32u * 32u * 6u);
  std::size_t total = 0;
  for (const auto& g : grids) total += g.anchors.size();
  EXPECT_EQ(total, std::size_t((32 * 32 + 16 * 16 + 4 * 8 * 8) * 6));
  EXPECT_EQ(flatten(grids).size(), 9216u);
}

TEST(Anchors, GeometryInvariants) {
  const auto grids = generate_anchors(level_shapes({96, 160}));
  const AnchorConfig cfg;
  for (const auto& g : grids) {
    EXPECT_EQ(g.stride, cfg.strides[g.level]);
    ASSERT_EQ(g.anchors.size(), std::size_t(g.height * g.width * 6));
    std::size_t n = 0;
    for (int i = 0; i < g.height; ++i)
      for (int j = 0; j < g.width; ++j)
        for (double s : cfg.scales)
          for (double r : cfg.ratios) {
            const Box& a = g.anchors[n++];
            EXPECT_NEAR(a.center_x(), (j + 0.5) * g.stride, 1e-9);
            EXPECT_NEAR(a.center_y(), (i + 0.5) * g.stride, 1e-9);
            EXPECT_NEAR(a.height() / a.width(), r, 1e-9);
            EXPECT_NEAR(a.width() * a.height(), std::pow(g.base_size * s, 2), 1e-6);
          }
  }
}

TEST(Anchors, RejectsZeroSizedLevel) {
  EXPECT_THROW(generate_level(0, 0, 4, 8, 32, {1.0}, {1.0}), Error);
  EXPECT_THROW(generate_anchors({{4, 4}, {2, 2}, {1, 1}, {1, 1}, {0, 1}, {1, 1}}), Error);
  EXPECT_THROW(generate_anchors({{4, 4}}), Error);
}

TEST(Anchors, CsvExport) {
  const auto grids = generate_anchors(level_shapes({32, 32}));
  std::stringstream ss;
  write_anchor_csv(ss, grids);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "level,index,x_min,y_min,x_max,y_max");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, int(flatten(grids).size()));
}

TEST(Encode, Examples) {
  const Box anchor{0, 0, 10, 10};
  EXPECT_EQ(encode_box(anchor, anchor), Eigen::Vector4d::Zero());
  const auto t = encode_box(anchor, Box{-5, -5, 15, 15});
  EXPECT_DOUBLE_EQ(t[0], 0);
  EXPECT_DOUBLE_EQ(t[1], 0);
  EXPECT_DOUBLE_EQ(t[2], std::log(2.0));
  EXPECT_DOUBLE_EQ(t[3], std::log(2.0));
  EXPECT_THROW(encode_box(anchor, Box{1, 1, 1, 4}), Error);
  EXPECT_THROW(encode_box(Box{0, 0, 0, 5}, anchor), Error);
}

TEST(Encode, RoundTripAndMonotoneDecode) {
  std::mt19937_64 rng(12);
  BoxVariances<double> var;
  var.values << 0.1, 0.1, 0.2, 0.2;
  for (int t = 0; t < 1000; ++t) {
    const Box a = test::random_box(rng, 500, 1.0), g = test::random_box(rng, 500, 1.0);
    for (const auto& v : {BoxVariances<double>{}, var}) {
      const Box back = decode_box(a, encode_box(a, g, v), v);
      EXPECT_NEAR(back.x_min, g.x_min, 1e-9);
      EXPECT_NEAR(back.y_min, g.y_min, 1e-9);
      EXPECT_NEAR(back.x_max, g.x_max, 1e-9);
      EXPECT_NEAR(back.y_max, g.y_max, 1e-9);
    }
    Eigen::Vector4d off = encode_box(a, g);
    const double w0 = decode_box(a, off).width();
    off[2] += 0.1;
    EXPECT_GT(decode_box(a, off).width(), w0);
  }
}

TEST(Match, NoGtsAllNegative) {
  const auto anchors = flatten(generate_anchors(level_shapes({64, 64})));
  const auto m = match_anchors(anchors, {});
  EXPECT_EQ(m.num_negative(), int(anchors.size()));
}

TEST(Match, ExactAnchorBecomesPositiveWithZeroTargets) {
  const auto anchors = flatten(generate_anchors(level_shapes({64, 64})));
  const std::vector<Box> gts{anchors[37]};
  const auto m = match_anchors(anchors, gts);
  EXPECT_EQ(m.labels[37].state, AnchorState::Positive);
  EXPECT_EQ(m.labels[37].gt_index, 0);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(m.targets(37, c), 0.0, 1e-12);
}

TEST(Match, ThresholdBands) {
  // Anchors against gt (0,0,10,10) with IoU 0.6, 0.45 and 0.1.
  const Box gt{0, 0, 10, 10};
  const std::vector<Box> anchors{{0, 0, 10, 6}, {0, 0, 10, 4.5}, {0, 0, 10, 1}};
  EXPECT_NEAR(iou(anchors[0], gt), 0.6, 1e-12);
  EXPECT_NEAR(iou(anchors[1], gt), 0.45, 1e-12);
  EXPECT_NEAR(iou(anchors[2], gt), 0.1, 1e-12);
  const std::vector<Box> gts{gt};
  const auto m = match_anchors(anchors, gts, {0.5, 0.4, {}});
  EXPECT_EQ(m.labels[0].state, AnchorState::Positive);
  EXPECT_EQ(m.labels[1].state, AnchorState::Ignore);
  EXPECT_EQ(m.labels[2].state, AnchorState::Negative);
  EXPECT_THROW(match_anchors(anchors, gts, {0.4, 0.4, {}}), Error);
}

TEST(Match, ForcedBestAnchorTiesToLowestIndex) {
  const Box gt{0, 0, 10, 10};
  const std::vector<Box> anchors{{0, 0, 10, 2}, {0, 0, 10, 3}, {0, 8, 10, 11}, {0, 0, 10, 3}};
  const std::vector<Box> gts{gt};
  const auto m = match_anchors(anchors, gts);
  EXPECT_EQ(m.labels[1].state, AnchorState::Positive);
  EXPECT_EQ(m.labels[3].state, AnchorState::Negative);
  EXPECT_EQ(m.num_positive(), 1);
}

// Straightforward reimplementation of the rule used as an oracle.
std::vector<AnchorLabel> reference_match(const std::vector<Box>& anchors, const std::vector<Box>& gts,
                                         double pos, double neg) {
  std::vector<AnchorLabel> out(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    double best = 0;
    int arg = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = oracle::overlap(anchors[a], gts[g]);
      if (arg < 0 || v > best) {
        best = v;
        arg = int(g);
      }
    }
    if (arg >= 0 && best >= pos) out[a] = {AnchorState::Positive, arg};
    else if (arg < 0 || best < neg) out[a] = {AnchorState::Negative, -1};
    else out[a] = {AnchorState::Ignore, -1};
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    double best = 0;
    int arg = -1;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      const double v = oracle::overlap(anchors[a], gts[g]);
      if (v > best) {
        best = v;
        arg = int(a);
      }
    }
    if (arg >= 0) out[arg] = {AnchorState::Positive, int(g)};
  }
  return out;
}

TEST(Match, AgreesWithReferenceAndPartitions) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> ngt(0, 5);
  const auto anchors = flatten(generate_anchors(level_shapes({64, 96})));
  for (int t = 0; t < 200; ++t) {
    std::vector<Box> gts;
    const int n = ngt(rng);
    for (int i = 0; i < n; ++i) gts.push_back(test::random_box(rng, 80, 4));
    const auto m = match_anchors(anchors, gts);
    const auto want = reference_match(anchors, gts, 0.5, 0.4);
    ASSERT_EQ(m.labels.size(), anchors.size());
    EXPECT_EQ(m.num_positive() + m.num_negative() + m.num_ignore(), int(anchors.size()));
    for (std::size_t a = 0; a < anchors.size(); ++a) {
      ASSERT_EQ(m.labels[a].state, want[a].state) << "trial " << t << " anchor " << a;
      if (want[a].state == AnchorState::Positive) {
        ASSERT_EQ(m.labels[a].gt_index, want[a].gt_index);
        const Eigen::Vector4d enc = encode_box(anchors[a], gts[want[a].gt_index]);
        for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(m.targets(Eigen::Index(a), c), enc[c]);
      }
    }
    // Every gt with any overlapping anchor keeps its best anchor unless a
    // later gt claims the same one.
    for (std::size_t g = 0; g < gts.size(); ++g) {
      double best = 0;
      int arg = -1;
      for (std::size_t a = 0; a < anchors.size(); ++a)
        if (iou(anchors[a], gts[g]) > best) {
          best = iou(anchors[a], gts[g]);
          arg = int(a);
        }
      if (arg < 0) continue;
      EXPECT_EQ(m.labels[arg].state, AnchorState::Positive);
      EXPECT_GE(m.labels[arg].gt_index, int(g));
    }
  }
}

MatchResult labels_only(const std::vector<int>& states) {
  MatchResult m;
  m.targets = decltype(m.targets)::Zero(Eigen::Index(states.size()), 4);
  for (int s : states)
    m.labels.push_back(s == 1 ? AnchorLabel{AnchorState::Positive, 0}
                              : s == 0 ? AnchorLabel{AnchorState::Negative, -1}
                                       : AnchorLabel{AnchorState::Ignore, -1});
  return m;
}

TEST(HardNegatives, Examples) {
  std::vector<int> states(12, 0);
  states[0] = states[5] = 1;
  const auto m = labels_only(states);
  const std::vector<double> loss{9, 0.5, 0.1, 0.9, 0.3, 9, 0.8, 0.2, 0.7, 0.05, 0.6, 0.4};
  EXPECT_EQ(select_hard_negatives(loss, m, 3.0), (std::vector<int>{1, 3, 6, 8, 10, 11}));

  const auto none = labels_only(std::vector<int>(5, 0));
  EXPECT_TRUE(select_hard_negatives(std::vector<double>(5, 1.0), none, 3.0).empty());

  const auto few = labels_only({1, 0, 0});
  EXPECT_EQ(select_hard_negatives(std::vector<double>{0, 1, 2}, few, 3.0), (std::vector<int>{1, 2}));
}

TEST(HardNegatives, TiesPreferLowerIndexAndRejectsNonFinite) {
  const auto m = labels_only({1, 0, 0, 0, 0, 0, -1});
  const std::vector<double> loss{0, 1, 2, 2, 2, 2, 100};
  EXPECT_EQ(select_hard_negatives(loss, m, 2.0), (std::vector<int>{2, 3}));
  std::vector<double> bad = loss;
  bad[3] = std::nan("");
  EXPECT_THROW(select_hard_negatives(bad, m, 2.0), Error);
  EXPECT_THROW(select_hard_negatives(loss, m, 0.0), Error);
}

TEST(HardNegatives, CountAndDominanceProperty) {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> n_dist(1, 60), st(-1, 1), eta_pick(1, 4);
  std::uniform_int_distribution<int> level(0, 20);
  for (int t = 0; t < 500; ++t) {
    const int n = n_dist(rng);
    std::vector<int> states(static_cast<std::size_t>(n));
    for (auto& s : states) s = st(rng);
    const auto m = labels_only(states);
    std::vector<double> loss(static_cast<std::size_t>(n));
    for (auto& l : loss) l = level(rng) / 4.0;
    const double eta = eta_pick(rng);
    const auto sel = select_hard_negatives(loss, m, eta);
    const int p = m.num_positive(), neg = m.num_negative();
    EXPECT_EQ(int(sel.size()), std::min(int(eta) * p, neg));
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    for (int i : sel) {
      ASSERT_EQ(m.labels[i].state, AnchorState::Negative);
      chosen[i] = true;
    }
    EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));
    for (int i : sel)
      for (int j = 0; j < n; ++j)
        if (!chosen[j] && m.labels[j].state == AnchorState::Negative) {
          EXPECT_GE(loss[i], loss[j]);
          if (loss[i] == loss[j]) EXPECT_LT(i, j);
        }
  }
}

}  // namespace
}  // namespace tigernet
