#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tigernet/box.hpp"
#include "tigernet/model_graph.hpp"

namespace tigernet {

/// Anchor tiling. Anchor size is base_size * scale; a ratio r is h/w, so
/// the box is (size / sqrt(r)) wide and (size * sqrt(r)) tall. Anchors per
/// cell A = |scales| * |ratios|, ordered scale-major.
struct AnchorConfig {
  std::vector<int> strides{8, 16, 32, 32, 32, 32};
  std::vector<double> base_sizes{32, 64, 96, 128, 192, 256};
  std::vector<double> scales{1.0, 1.4142135623730951};
  std::vector<double> ratios{0.5, 1.0, 2.0};

  int anchors_per_cell() const { return int(scales.size() * ratios.size()); }
};

struct AnchorGrid {
  int level = 0;
  int stride = 0;
  int height = 0;
  int width = 0;
  double base_size = 0;
  std::vector<double> scales;
  std::vector<double> ratios;
  // Row-major over (row, col, anchor).
  std::vector<Box> anchors;
};

/// Single level; centers at ((j + 0.5) * stride, (i + 0.5) * stride).
AnchorGrid generate_level(int level, int height, int width, int stride, double base_size,
                          const std::vector<double>& scales, const std::vector<double>& ratios);

/// One grid per level. Anchors are not clipped to the image.
std::vector<AnchorGrid> generate_anchors(const std::vector<Extent2>& shapes,
                                         const AnchorConfig& config = {});

/// Level shapes implied by the stride schedule for a given input.
std::vector<Extent2> level_shapes(Extent2 input, const AnchorConfig& config = {});

/// Concatenation of every level's anchors, level-major. This is the anchor
/// index space used by matching, losses and decoding.
std::vector<Box> flatten(const std::vector<AnchorGrid>& grids);

void write_anchor_csv(std::ostream& os, const std::vector<AnchorGrid>& grids);

enum class AnchorState { Negative, Ignore, Positive };

struct AnchorLabel {
  AnchorState state = AnchorState::Negative;
  int gt_index = -1;
};

struct MatchConfig {
  double pos_iou = 0.5;
  double neg_iou = 0.4;
  BoxVariances<double> variances;
};

struct MatchResult {
  std::vector<AnchorLabel> labels;
  // One row per anchor; only rows of positive anchors are meaningful.
  Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor> targets;

  int num_positive() const;
  int num_negative() const;
  int num_ignore() const;
};

/// Positive when IoU with the best gt >= pos_iou, Negative when the max IoU
/// < neg_iou, Ignore otherwise. Each gt's best anchor (lowest index on ties)
/// is then forced Positive if it overlaps at all. A gt ties to the lowest
/// gt index; a forced anchor claimed by two gts goes to the later one.
MatchResult match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                          const MatchConfig& config = {});

/// The k negatives with the largest loss, ascending by anchor index.
/// Ties in loss are broken by lower anchor index.
std::vector<int> top_k_negatives(std::span<const double> per_anchor_loss, const MatchResult& match,
                                 int k);

/// Hard-negative mining: min(floor(eta * #positive), #negative) negatives
/// with the greatest classification loss.
std::vector<int> select_hard_negatives(std::span<const double> per_anchor_loss,
                                       const MatchResult& match, double eta = 3.0);

}  // namespace tigernet
