#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tigernet/anchors.hpp"
#include "tigernet/error.hpp"

namespace tigernet {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct LossWithGrad {
  Scalar value{0};
  RowMatrix<Scalar> grad;
};

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
template <typename Scalar>
Scalar smooth_l1(Scalar x) {
  const Scalar a = std::abs(x);
  return a < Scalar(1) ? Scalar(0.5) * x * x : a - Scalar(0.5);
}

template <typename Scalar>
Scalar smooth_l1_derivative(Scalar x) {
  if (std::abs(x) < Scalar(1)) return x;
  return x > Scalar(0) ? Scalar(1) : Scalar(-1);
}

/// Sum over coordinates, mean over rows (one row per positive anchor).
template <typename Scalar>
LossWithGrad<Scalar> smooth_l1(const RowMatrix<Scalar>& residuals) {
  LossWithGrad<Scalar> out;
  out.grad = RowMatrix<Scalar>::Zero(residuals.rows(), residuals.cols());
  if (residuals.rows() == 0) return out;
  const Scalar n = Scalar(residuals.rows());
  for (Eigen::Index i = 0; i < residuals.rows(); ++i)
    for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
      out.value += smooth_l1(residuals(i, j));
      out.grad(i, j) = smooth_l1_derivative(residuals(i, j)) / n;
    }
  out.value /= n;
  return out;
}

/// Mean over rows of -log p[row, label]. The gradient is with respect to
/// the probabilities. Rows must be distributions (sum 1 within 1e-6).
template <typename Scalar>
LossWithGrad<Scalar> cross_entropy(const RowMatrix<Scalar>& probs, std::span<const int> labels) {
  if (std::size_t(probs.rows()) != labels.size())
    throw Error("cross_entropy: one label per row required");
  if (probs.cols() < 2) throw Error("cross_entropy: at least two classes required");
  LossWithGrad<Scalar> out;
  out.grad = RowMatrix<Scalar>::Zero(probs.rows(), probs.cols());
  if (probs.rows() == 0) return out;
  const Scalar n = Scalar(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    if (std::abs(probs.row(i).sum() - Scalar(1)) > Scalar(1e-6))
      throw Error("cross_entropy: row " + std::to_string(i) + " does not sum to 1");
    const int c = labels[i];
    if (c < 0 || c >= probs.cols()) throw Error("cross_entropy: label out of range");
    const Scalar p = probs(i, c);
    if (!(p > Scalar(0)))
      throw Error("cross_entropy: probability at the labeled class of row " + std::to_string(i) +
                  " is not positive");
    out.value -= std::log(p);
    out.grad(i, c) = Scalar(-1) / (n * p);
  }
  out.value /= n;
  return out;
}

template <typename Scalar>
RowMatrix<Scalar> softmax(const RowMatrix<Scalar>& logits) {
  RowMatrix<Scalar> p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

/// -log softmax(logits)[label] per row, via log-sum-exp.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_row_cross_entropy(const RowMatrix<Scalar>& logits,
                                                               std::span<const int> labels) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar m = logits.row(i).maxCoeff();
    const Scalar lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out[i] = lse - logits(i, labels[i]);
  }
  return out;
}

/// Cross-entropy over softmax(logits); gradient with respect to logits is
/// (softmax - onehot) / rows.
template <typename Scalar>
LossWithGrad<Scalar> softmax_cross_entropy(const RowMatrix<Scalar>& logits,
                                           std::span<const int> labels) {
  if (std::size_t(logits.rows()) != labels.size())
    throw Error("softmax_cross_entropy: one label per row required");
  LossWithGrad<Scalar> out;
  out.grad = RowMatrix<Scalar>::Zero(logits.rows(), logits.cols());
  if (logits.rows() == 0) return out;
  const Scalar n = Scalar(logits.rows());
  out.value = per_row_cross_entropy<Scalar>(logits, labels).sum() / n;
  out.grad = softmax<Scalar>(logits) / n;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out.grad(i, labels[i]) -= Scalar(1) / n;
  return out;
}

struct DetectionLossConfig {
  double eta = 3.0;
  double lambda = 1.0;
  // Hardest negatives used when an image has no positive anchor.
  int min_negatives = 8;
};

template <typename Scalar>
struct LossReport {
  Scalar cls_loss{0};
  Scalar box_loss{0};
  Scalar total{0};
  double lambda = 1.0;
  double eta = 3.0;
  int num_positive = 0;
  int num_selected_negative = 0;
  std::vector<int> selected_negatives;
  // Gradients of `total`.
  RowMatrix<Scalar> grad_logits;
  RowMatrix<Scalar> grad_box;

  static constexpr const char* kConvention =
      "cls=mean CE over positives+selected negatives; box=sum smooth-L1 over coords, mean over "
      "positives";

  static std::string csv_header() {
    return "cls_loss,box_loss,total,lambda,eta,num_positive,num_selected_negative";
  }
  std::string csv_line() const {
    std::ostringstream os;
    os.precision(17);
    os << cls_loss << ',' << box_loss << ',' << total << ',' << lambda << ',' << eta << ','
       << num_positive << ',' << num_selected_negative;
    return os.str();
  }
};

/// Classification over positives plus mined negatives, box regression over
/// positives. `logits` is (anchors x classes) with class 0 background;
/// `box_pred` is (anchors x 4) in the encoded offset space of `match`.
/// `gt_classes[g]` is the class of gt g (class 1 for every gt when empty).
template <typename Scalar>
LossReport<Scalar> detection_loss(const RowMatrix<Scalar>& logits, const RowMatrix<Scalar>& box_pred,
                                  const MatchResult& match, const DetectionLossConfig& config = {},
                                  std::span<const int> gt_classes = {}) {
  const Eigen::Index n = Eigen::Index(match.labels.size());
  if (logits.rows() != n || box_pred.rows() != n || box_pred.cols() != 4 || logits.cols() < 2)
    throw Error("detection_loss: prediction shapes do not match the anchor count");
  if (!logits.allFinite() || !box_pred.allFinite())
    throw Error("detection_loss: non-finite prediction");

  std::vector<int> labels(std::size_t(n), 0);
  std::vector<int> positives;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& l = match.labels[i];
    if (l.state != AnchorState::Positive) continue;
    positives.push_back(int(i));
    labels[i] = gt_classes.empty() ? 1 : gt_classes[std::size_t(l.gt_index)];
    if (labels[i] <= 0 || labels[i] >= logits.cols())
      throw Error("detection_loss: gt class out of range");
  }

  const auto per_anchor = per_row_cross_entropy<Scalar>(logits, labels);
  std::vector<double> neg_loss(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) neg_loss[i] = double(per_anchor[i]);

  LossReport<Scalar> r;
  r.lambda = config.lambda;
  r.eta = config.eta;
  r.num_positive = int(positives.size());
  r.selected_negatives = positives.empty()
                             ? top_k_negatives(neg_loss, match, config.min_negatives)
                             : select_hard_negatives(neg_loss, match, config.eta);
  r.num_selected_negative = int(r.selected_negatives.size());
  r.grad_logits = RowMatrix<Scalar>::Zero(n, logits.cols());
  r.grad_box = RowMatrix<Scalar>::Zero(n, 4);

  std::vector<int> contributing = positives;
  contributing.insert(contributing.end(), r.selected_negatives.begin(), r.selected_negatives.end());
  if (!contributing.empty()) {
    RowMatrix<Scalar> rows(Eigen::Index(contributing.size()), logits.cols());
    std::vector<int> row_labels;
    for (std::size_t k = 0; k < contributing.size(); ++k) {
      rows.row(Eigen::Index(k)) = logits.row(contributing[k]);
      row_labels.push_back(labels[std::size_t(contributing[k])]);
    }
    const auto ce = softmax_cross_entropy<Scalar>(rows, row_labels);
    r.cls_loss = ce.value;
    for (std::size_t k = 0; k < contributing.size(); ++k)
      r.grad_logits.row(contributing[k]) = ce.grad.row(Eigen::Index(k));
  }

  if (!positives.empty()) {
    RowMatrix<Scalar> residuals(Eigen::Index(positives.size()), 4);
    for (std::size_t k = 0; k < positives.size(); ++k)
      residuals.row(Eigen::Index(k)) =
          box_pred.row(positives[k]) - match.targets.row(positives[k]).template cast<Scalar>();
    const auto sl1 = smooth_l1<Scalar>(residuals);
    r.box_loss = sl1.value;
    for (std::size_t k = 0; k < positives.size(); ++k)
      r.grad_box.row(positives[k]) = Scalar(config.lambda) * sl1.grad.row(Eigen::Index(k));
  }

  r.total = r.cls_loss + Scalar(config.lambda) * r.box_loss;
  return r;
}

}  // namespace tigernet
