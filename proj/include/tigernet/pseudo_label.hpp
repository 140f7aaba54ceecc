#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tigernet/data_io.hpp"
#include "tigernet/postprocess.hpp"

namespace tigernet {

/// Class names indexed by class id; id 0 is background.
using ClassNames = std::vector<std::string>;
inline ClassNames default_class_names() { return {"background", "tiger"}; }

struct PseudoLabelConfig {
  // 0 reproduces the "raw predictions" reading literally.
  double score_thresh = 0.5;
  NmsMode nms_mode = NmsMode::Blend;
  double iou_thresh = 0.5;
  bool keep_empty = true;
  ClassNames class_names = default_class_names();
};

/// Teacher detections to pseudo-labelled records, one per entry of
/// `image_sizes` (in that order): per image suppress, drop scores below the
/// threshold, clip to the image and emit the survivors as non-difficult
/// annotations carrying their score. Every record is tagged pseudo.
std::vector<ImageRecord> predictions_to_labels(std::span<const Detection> dets,
                                               std::span<const ImageSize> image_sizes,
                                               const PseudoLabelConfig& config = {});

enum class DedupPolicy { PreferLabeled, Error };
DedupPolicy parse_dedup_policy(const std::string& s);

/// Labeled records first, then pseudo records whose image id is not
/// already present. Provenance tags are carried through untouched.
std::vector<ImageRecord> merge_datasets(std::span<const ImageRecord> labeled,
                                        std::span<const ImageRecord> pseudo, DedupPolicy policy);

struct ProvenanceCounts {
  int images = 0;
  int boxes = 0;
  double mean_boxes_per_image() const { return images > 0 ? double(boxes) / images : 0.0; }
};

struct DistillReport {
  ProvenanceCounts human;
  ProvenanceCounts pseudo;
  // Pseudo-box scores in ten bins of width 0.1 over [0, 1]; 1.0 lands in
  // the last bin.
  std::array<int, 10> score_histogram{};
  int unscored_pseudo_boxes = 0;
};

DistillReport distill_report(std::span<const ImageRecord> merged);
void write_distill_csv(std::ostream& os, const DistillReport& report);

}  // namespace tigernet
