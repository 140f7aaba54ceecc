#include "tigernet/loss_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tigernet {

LossInstance random_loss_instance(std::uint64_t seed, int num_anchors, int num_classes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> logit(0.0, 2.0);
  std::normal_distribution<double> offset(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  LossInstance inst;
  inst.logits.resize(num_anchors, num_classes);
  inst.box.resize(num_anchors, 4);
  inst.match.labels.resize(std::size_t(num_anchors));
  inst.match.targets.setZero(num_anchors, 4);
  for (int i = 0; i < num_anchors; ++i) {
    for (int k = 0; k < num_classes; ++k) inst.logits(i, k) = logit(rng);
    const double r = u(rng);
    auto& label = inst.match.labels[std::size_t(i)];
    if (r < 0.15) {
      label = {AnchorState::Positive, 0};
      for (int k = 0; k < 4; ++k) inst.match.targets(i, k) = 0.5 * offset(rng);
    } else if (r < 0.25) {
      label = {AnchorState::Ignore, -1};
    } else {
      label = {AnchorState::Negative, -1};
    }
    for (int k = 0; k < 4; ++k) inst.box(i, k) = inst.match.targets(i, k) + 1.5 * offset(rng);
  }
  return inst;
}

GradientCheck check_gradients(const LossInstance& inst, const DetectionLossConfig& config,
                              double step) {
  const auto base = detection_loss<double>(inst.logits, inst.box, inst.match, config);
  GradientCheck out;
  auto rel = [](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
  };

  auto probe = [&](RowMatrix<double> logits, RowMatrix<double> box, bool on_logits, Eigen::Index i,
                   Eigen::Index j, double analytic) {
    auto& target = on_logits ? logits : box;
    const double x0 = target(i, j);
    target(i, j) = x0 + step;
    const auto plus = detection_loss<double>(logits, box, inst.match, config);
    target(i, j) = x0 - step;
    const auto minus = detection_loss<double>(logits, box, inst.match, config);
    if (plus.selected_negatives != base.selected_negatives ||
        minus.selected_negatives != base.selected_negatives) {
      ++out.skipped;
      return;
    }
    const double numeric = (plus.total - minus.total) / (2 * step);
    out.max_rel_error = std::max(out.max_rel_error, rel(analytic, numeric));
    ++out.checked;
  };

  for (Eigen::Index i = 0; i < inst.logits.rows(); ++i)
    for (Eigen::Index j = 0; j < inst.logits.cols(); ++j)
      probe(inst.logits, inst.box, true, i, j, base.grad_logits(i, j));
  for (Eigen::Index i = 0; i < inst.box.rows(); ++i)
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double residual = inst.box(i, j) - inst.match.targets(i, j);
      if (inst.match.labels[std::size_t(i)].state == AnchorState::Positive &&
          std::abs(std::abs(residual) - 1.0) < 1e-6) {
        ++out.skipped;
        continue;
      }
      probe(inst.logits, inst.box, false, i, j, base.grad_box(i, j));
    }
  return out;
}

}  // namespace tigernet
