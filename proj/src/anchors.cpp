#include "tigernet/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace tigernet {

AnchorGrid generate_level(int level, int height, int width, int stride, double base_size,
                          const std::vector<double>& scales, const std::vector<double>& ratios) {
  if (height <= 0 || width <= 0) throw Error("anchor level " + std::to_string(level) + " is empty");
  if (stride <= 0 || !(base_size > 0)) throw Error("anchor stride and base size must be positive");
  if (scales.empty() || ratios.empty()) throw Error("anchor scales and ratios must be non-empty");
  for (double v : scales)
    if (!(v > 0)) throw Error("anchor scales must be positive");
  for (double v : ratios)
    if (!(v > 0)) throw Error("anchor ratios must be positive");

  AnchorGrid g{level, stride, height, width, base_size, scales, ratios, {}};
  g.anchors.reserve(std::size_t(height) * width * scales.size() * ratios.size());
  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      const double cx = (j + 0.5) * stride;
      const double cy = (i + 0.5) * stride;
      for (double s : scales)
        for (double r : ratios) {
          const double size = base_size * s;
          const double w = size / std::sqrt(r);
          const double h = size * std::sqrt(r);
          g.anchors.push_back({cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2});
        }
    }
  return g;
}

std::vector<AnchorGrid> generate_anchors(const std::vector<Extent2>& shapes,
                                         const AnchorConfig& config) {
  if (shapes.size() != config.strides.size() || shapes.size() != config.base_sizes.size())
    throw Error("generate_anchors: expected " + std::to_string(config.strides.size()) +
                " levels, got " + std::to_string(shapes.size()));
  std::vector<AnchorGrid> grids;
  for (std::size_t l = 0; l < shapes.size(); ++l)
    grids.push_back(generate_level(int(l), shapes[l].h, shapes[l].w, config.strides[l],
                                   config.base_sizes[l], config.scales, config.ratios));
  return grids;
}

std::vector<Extent2> level_shapes(Extent2 input, const AnchorConfig& config) {
  std::vector<Extent2> shapes;
  for (int s : config.strides) {
    if (input.h % s != 0 || input.w % s != 0)
      throw Error("input " + std::to_string(input.h) + "x" + std::to_string(input.w) +
                  " is not divisible by stride " + std::to_string(s));
    shapes.push_back({input.h / s, input.w / s});
  }
  return shapes;
}

std::vector<Box> flatten(const std::vector<AnchorGrid>& grids) {
  std::vector<Box> all;
  for (const auto& g : grids) all.insert(all.end(), g.anchors.begin(), g.anchors.end());
  return all;
}

void write_anchor_csv(std::ostream& os, const std::vector<AnchorGrid>& grids) {
  const auto old = os.precision(17);
  os << "level,index,x_min,y_min,x_max,y_max\n";
  for (const auto& g : grids)
    for (std::size_t i = 0; i < g.anchors.size(); ++i) {
      const auto& a = g.anchors[i];
      os << g.level << ',' << i << ',' << a.x_min << ',' << a.y_min << ',' << a.x_max << ','
         << a.y_max << '\n';
    }
  os.precision(old);
}

namespace {
int count_state(const std::vector<AnchorLabel>& labels, AnchorState s) {
  return int(std::count_if(labels.begin(), labels.end(),
                           [s](const AnchorLabel& l) { return l.state == s; }));
}
}  // namespace

int MatchResult::num_positive() const { return count_state(labels, AnchorState::Positive); }
int MatchResult::num_negative() const { return count_state(labels, AnchorState::Negative); }
int MatchResult::num_ignore() const { return count_state(labels, AnchorState::Ignore); }

MatchResult match_anchors(std::span<const Box> anchors, std::span<const Box> gts,
                          const MatchConfig& config) {
  if (!(config.pos_iou > config.neg_iou))
    throw Error("match_anchors: pos_iou must exceed neg_iou");
  const Eigen::Index n = Eigen::Index(anchors.size());
  const Eigen::Index g = Eigen::Index(gts.size());

  MatchResult result;
  result.labels.assign(anchors.size(), {});
  result.targets.setZero(n, 4);
  if (g == 0) return result;

  Eigen::MatrixXd overlap(n, g);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < g; ++j) overlap(i, j) = iou(anchors[i], gts[j]);

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    const double best_iou = overlap.row(i).maxCoeff(&best);  // first max on ties
    auto& label = result.labels[i];
    if (best_iou >= config.pos_iou) {
      label = {AnchorState::Positive, int(best)};
    } else if (best_iou < config.neg_iou) {
      label = {AnchorState::Negative, -1};
    } else {
      label = {AnchorState::Ignore, -1};
    }
  }

  for (Eigen::Index j = 0; j < g; ++j) {
    Eigen::Index best = 0;
    const double best_iou = overlap.col(j).maxCoeff(&best);
    if (best_iou > 0) result.labels[best] = {AnchorState::Positive, int(j)};
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& label = result.labels[i];
    if (label.state == AnchorState::Positive)
      result.targets.row(i) = encode_box(anchors[i], gts[label.gt_index], config.variances);
  }
  return result;
}

std::vector<int> top_k_negatives(std::span<const double> per_anchor_loss, const MatchResult& match,
                                 int k) {
  if (per_anchor_loss.size() != match.labels.size())
    throw Error("hard-negative selection: loss count does not match anchor count");
  std::vector<int> negatives;
  for (std::size_t i = 0; i < match.labels.size(); ++i) {
    if (match.labels[i].state != AnchorState::Negative) continue;
    if (!std::isfinite(per_anchor_loss[i]))
      throw Error("hard-negative selection: non-finite loss at anchor " + std::to_string(i));
    negatives.push_back(int(i));
  }
  k = std::clamp(k, 0, int(negatives.size()));
  std::stable_sort(negatives.begin(), negatives.end(), [&](int a, int b) {
    return per_anchor_loss[a] > per_anchor_loss[b];
  });
  negatives.resize(k);
  std::sort(negatives.begin(), negatives.end());
  return negatives;
}

std::vector<int> select_hard_negatives(std::span<const double> per_anchor_loss,
                                       const MatchResult& match, double eta) {
  if (!(eta > 0)) throw Error("hard-negative selection: eta must be positive");
  const double want = std::floor(eta * match.num_positive());
  return top_k_negatives(per_anchor_loss, match, int(std::min<double>(want, 1 << 30)));
}

}  // namespace tigernet
