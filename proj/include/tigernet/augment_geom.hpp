#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "tigernet/data_io.hpp"

namespace tigernet {

enum class FlipAxis { Horizontal, Vertical };

/// Horizontal: x -> width - x; vertical: y -> height - y. An involution.
ImageRecord flip_boxes(const ImageRecord& record, FlipAxis axis);

struct AffineParams {
  double rotation_deg = 0;  // counter-clockwise in image coordinates (y down)
  double shift_x = 0;
  double shift_y = 0;
  double scale = 1;
  // Boxes whose clipped area is below this fraction of their transformed
  // (unclipped) hull area are dropped.
  double min_visibility = 0.25;
};

/// 2x3 map p -> R(theta) * scale * (p - c) + c + shift about the image
/// center c, on an output canvas of the same size.
Eigen::Matrix<double, 2, 3> affine_matrix(const AffineParams& params, int width, int height);

/// Each box's four corners are mapped, replaced by their axis-aligned hull,
/// and clipped to the image.
ImageRecord affine_boxes(const ImageRecord& record, const AffineParams& params);

struct CutoutPlacement {
  std::string image_id;
  std::string src_image_id;
  Box src_bbox;
  Box dst_bbox;
};

struct CutoutConfig {
  double max_iou_with_existing = 0.3;
  int max_attempts = 100;
  std::string class_name = "tiger";
};

struct CutoutResult {
  ImageRecord record;
  // Empty when no position within the attempt budget satisfied the overlap
  // constraint; the record is then returned unchanged.
  std::optional<CutoutPlacement> placement;
};

/// Rejection sampling of a destination for a donor box of the same size:
/// the top-left corner is uniform over [0, W - w] x [0, H - h] and accepted
/// when the IoU with every existing annotation is <= the budget.
CutoutResult place_cutout(const ImageRecord& record, const std::string& src_image_id,
                          const Box& donor, std::uint64_t seed, const CutoutConfig& config = {});

/// JSONL: {"image_id", "src_image_id", "src_bbox", "dst_bbox"}.
void write_placement_jsonl(std::ostream& os, std::span<const CutoutPlacement> plans);

}  // namespace tigernet
