#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/Core>

#include "tigernet/error.hpp"

namespace tigernet {

/// Axis-aligned box in continuous, 0-based absolute pixel coordinates.
template <typename Scalar>
struct BoundingBox {
  Scalar x_min{0};
  Scalar y_min{0};
  Scalar x_max{0};
  Scalar y_max{0};

  using Vector4 = Eigen::Matrix<Scalar, 4, 1>;

  static BoundingBox from_vector(const Vector4& v) { return {v[0], v[1], v[2], v[3]}; }
  Vector4 as_vector() const { return Vector4(x_min, y_min, x_max, y_max); }

  Scalar width() const { return x_max - x_min; }
  Scalar height() const { return y_max - y_min; }
  Scalar area() const { return std::max(Scalar(0), width()) * std::max(Scalar(0), height()); }
  Scalar center_x() const { return (x_min + x_max) / Scalar(2); }
  Scalar center_y() const { return (y_min + y_max) / Scalar(2); }

  bool valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
  }

  template <typename Other>
  BoundingBox<Other> cast() const {
    return {static_cast<Other>(x_min), static_cast<Other>(y_min), static_cast<Other>(x_max),
            static_cast<Other>(y_max)};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

using Box = BoundingBox<double>;

template <typename Scalar>
std::ostream& operator<<(std::ostream& os, const BoundingBox<Scalar>& b) {
  return os << '(' << b.x_min << ',' << b.y_min << ',' << b.x_max << ',' << b.y_max << ')';
}

template <typename Scalar>
Scalar intersection_area(const BoundingBox<Scalar>& a, const BoundingBox<Scalar>& b) {
  const Scalar w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const Scalar h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= Scalar(0) || h <= Scalar(0)) return Scalar(0);
  return w * h;
}

/// Intersection over union; 0 when the union is empty.
template <typename Scalar>
Scalar iou(const BoundingBox<Scalar>& a, const BoundingBox<Scalar>& b) {
  const Scalar inter = intersection_area(a, b);
  const Scalar uni = a.area() + b.area() - inter;
  if (uni <= Scalar(0)) return Scalar(0);
  return std::clamp(inter / uni, Scalar(0), Scalar(1));
}

template <typename Scalar>
BoundingBox<Scalar> clip(const BoundingBox<Scalar>& b, Scalar width, Scalar height) {
  return {std::clamp(b.x_min, Scalar(0), width), std::clamp(b.y_min, Scalar(0), height),
          std::clamp(b.x_max, Scalar(0), width), std::clamp(b.y_max, Scalar(0), height)};
}

/// Per-coordinate scaling applied to encoded offsets (tx, ty, tw, th are
/// divided by these on encode and multiplied on decode).
template <typename Scalar>
struct BoxVariances {
  Eigen::Matrix<Scalar, 4, 1> values = Eigen::Matrix<Scalar, 4, 1>::Ones();
};

/// Center/log-size parameterization:
///   tx = (cx_gt - cx_a) / w_a,  ty = (cy_gt - cy_a) / h_a,
///   tw = ln(w_gt / w_a),        th = ln(h_gt / h_a).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> encode_box(const BoundingBox<Scalar>& anchor,
                                       const BoundingBox<Scalar>& gt,
                                       const BoxVariances<Scalar>& var = {}) {
  const Scalar wa = anchor.width(), ha = anchor.height();
  const Scalar wg = gt.width(), hg = gt.height();
  if (!(wa > Scalar(0)) || !(ha > Scalar(0))) throw Error("encode_box: anchor has nonpositive size");
  if (!(wg > Scalar(0)) || !(hg > Scalar(0)))
    throw Error("encode_box: ground-truth box has nonpositive size");
  Eigen::Matrix<Scalar, 4, 1> t;
  t << (gt.center_x() - anchor.center_x()) / wa, (gt.center_y() - anchor.center_y()) / ha,
      std::log(wg / wa), std::log(hg / ha);
  return t.cwiseQuotient(var.values);
}

template <typename Scalar>
BoundingBox<Scalar> decode_box(const BoundingBox<Scalar>& anchor,
                               const Eigen::Matrix<Scalar, 4, 1>& offsets,
                               const BoxVariances<Scalar>& var = {}) {
  const Scalar wa = anchor.width(), ha = anchor.height();
  if (!(wa > Scalar(0)) || !(ha > Scalar(0))) throw Error("decode_box: anchor has nonpositive size");
  const Eigen::Matrix<Scalar, 4, 1> t = offsets.cwiseProduct(var.values);
  const Scalar cx = anchor.center_x() + t[0] * wa;
  const Scalar cy = anchor.center_y() + t[1] * ha;
  const Scalar w = wa * std::exp(t[2]);
  const Scalar h = ha * std::exp(t[3]);
  return {cx - w / Scalar(2), cy - h / Scalar(2), cx + w / Scalar(2), cy + h / Scalar(2)};
}

}  // namespace tigernet
