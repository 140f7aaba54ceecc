#pragma once

#include <cstdint>

#include "tigernet/losses.hpp"

namespace tigernet {

/// A synthetic detection-loss problem: random logits, random box
/// predictions and a random anchor labelling with encoded targets.
struct LossInstance {
  RowMatrix<double> logits;
  RowMatrix<double> box;
  MatchResult match;
};

LossInstance random_loss_instance(std::uint64_t seed, int num_anchors = 48, int num_classes = 2);

struct GradientCheck {
  double max_rel_error = 0;
  int checked = 0;
  // Coordinates skipped because they sit on a non-differentiable point:
  // within 1e-6 of the smooth-L1 seam, or where the mined negative set
  // changes inside the finite-difference stencil.
  int skipped = 0;
};

/// Central finite differences of `total` against the analytic gradients.
/// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheck check_gradients(const LossInstance& inst, const DetectionLossConfig& config = {},
                              double step = 1e-5);

}  // namespace tigernet
