#include "tigernet/augment_geom.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "json.hpp"

namespace tigernet {

ImageRecord flip_boxes(const ImageRecord& record, FlipAxis axis) {
  ImageRecord out = record;
  const double w = record.width, h = record.height;
  for (auto& a : out.annotations) {
    const Box b = a.box;
    if (axis == FlipAxis::Horizontal) {
      a.box.x_min = w - b.x_max;
      a.box.x_max = w - b.x_min;
    } else {
      a.box.y_min = h - b.y_max;
      a.box.y_max = h - b.y_min;
    }
  }
  return out;
}

Eigen::Matrix<double, 2, 3> affine_matrix(const AffineParams& p, int width, int height) {
  const double theta = p.rotation_deg * std::numbers::pi / 180.0;
  // Counter-clockwise as seen on screen, where y points down.
  Eigen::Matrix2d lin;
  lin << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  lin *= p.scale;
  const Eigen::Vector2d c(width / 2.0, height / 2.0);
  Eigen::Matrix<double, 2, 3> m;
  m.leftCols<2>() = lin;
  m.col(2) = c - lin * c + Eigen::Vector2d(p.shift_x, p.shift_y);
  return m;
}

ImageRecord affine_boxes(const ImageRecord& record, const AffineParams& params) {
  if (!(params.scale > 0)) throw Error("affine: scale must be positive");
  if (record.width <= 0 || record.height <= 0)
    throw Error("affine: image '" + record.image_id + "' has zero area");
  const auto m = affine_matrix(params, record.width, record.height);
  ImageRecord out = record;
  out.annotations.clear();
  for (const auto& a : record.annotations) {
    Eigen::Matrix<double, 3, 4> corners;
    corners << a.box.x_min, a.box.x_max, a.box.x_max, a.box.x_min,  //
        a.box.y_min, a.box.y_min, a.box.y_max, a.box.y_max,         //
        1, 1, 1, 1;
    const Eigen::Matrix<double, 2, 4> mapped = m * corners;
    const Box hull{mapped.row(0).minCoeff(), mapped.row(1).minCoeff(), mapped.row(0).maxCoeff(),
                   mapped.row(1).maxCoeff()};
    const Box clipped = clip(hull, double(record.width), double(record.height));
    const double full = hull.area();
    // Degenerate boxes survive only when they stay inside the image.
    const bool keep =
        full > 0 ? clipped.area() >= params.min_visibility * full : clipped == hull;
    if (!keep) continue;
    Annotation moved = a;
    moved.box = clipped;
    out.annotations.push_back(std::move(moved));
  }
  return out;
}

CutoutResult place_cutout(const ImageRecord& record, const std::string& src_image_id,
                          const Box& donor, std::uint64_t seed, const CutoutConfig& config) {
  const double w = donor.width(), h = donor.height();
  if (!(w > 0) || !(h > 0)) throw Error("cutout: donor box has zero area");
  if (w > record.width || h > record.height)
    throw Error("cutout: donor box does not fit inside image '" + record.image_id + "'");
  if (config.max_attempts <= 0) throw Error("cutout: attempt budget must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, record.width - w);
  std::uniform_real_distribution<double> uy(0.0, record.height - h);
  CutoutResult result{record, std::nullopt};
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const double x0 = ux(rng), y0 = uy(rng);
    const Box dst{x0, y0, x0 + w, y0 + h};
    bool ok = true;
    for (const auto& a : record.annotations)
      if (iou(a.box, dst) > config.max_iou_with_existing) {
        ok = false;
        break;
      }
    if (!ok) continue;
    result.record.annotations.push_back({config.class_name, dst, false, std::nullopt});
    result.placement = CutoutPlacement{record.image_id, src_image_id, donor, dst};
    break;
  }
  return result;
}

void write_placement_jsonl(std::ostream& os, std::span<const CutoutPlacement> plans) {
  auto arr = [](const Box& b) { return nlohmann::json::array({b.x_min, b.y_min, b.x_max, b.y_max}); };
  for (const auto& p : plans) {
    nlohmann::ordered_json j;
    j["image_id"] = p.image_id;
    j["src_image_id"] = p.src_image_id;
    j["src_bbox"] = arr(p.src_bbox);
    j["dst_bbox"] = arr(p.dst_bbox);
    os << j.dump() << '\n';
  }
}

}  // namespace tigernet
