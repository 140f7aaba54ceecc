#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tigernet/anchors.hpp"
#include "tigernet/box.hpp"
#include "tigernet/forward.hpp"
#include "tigernet/losses.hpp"

namespace tigernet {

struct Detection {
  std::string image_id;
  Box box;
  double score = 0;
  int class_id = 1;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct FlatPredictions {
  RowMatrix<double> logits;  // anchors x classes
  RowMatrix<double> box;     // anchors x 4
};

/// Reorder per-level head tensors into the flat anchor index space of
/// `flatten(grids)`: anchor a of cell (i, j) reads class channels
/// [a*K, a*K + K) and box channels [4a, 4a + 4).
FlatPredictions flatten_heads(const std::vector<HeadOutput<double>>& heads,
                              const std::vector<AnchorGrid>& grids, int num_classes);

/// Softmax scores; every non-background class with score >= score_thresh
/// becomes a detection whose box is the decoded anchor clipped to
/// [0, width] x [0, height]. Emitted in anchor order, then class order.
std::vector<Detection> decode_detections(const FlatPredictions& preds, std::span<const Box> anchors,
                                         double score_thresh, Extent2 clip_to,
                                         const std::string& image_id = {},
                                         const BoxVariances<double>& variances = {});

std::vector<Detection> decode_detections(const std::vector<HeadOutput<double>>& heads,
                                         const std::vector<AnchorGrid>& grids, int num_classes,
                                         double score_thresh, Extent2 clip_to,
                                         const std::string& image_id = {});

/// Indices sorted by descending score; equal scores keep input order.
std::vector<int> score_order(std::span<const Detection> dets);

/// Highest-score-first suppression: a candidate is dropped when its IoU
/// with an already kept box is >= iou_thresh. Returns kept input indices in
/// output (descending score) order.
std::vector<int> greedy_nms_indices(std::span<const Detection> dets, double iou_thresh = 0.5);
std::vector<Detection> greedy_nms(std::span<const Detection> dets, double iou_thresh = 0.5);

struct Cluster {
  int seed = 0;
  std::vector<int> members;  // includes the seed, in score order
};

/// Same seeds as greedy_nms. Each seed's cluster is every not yet claimed
/// detection whose IoU with the seed is >= iou_thresh.
std::vector<Cluster> blend_clusters(std::span<const Detection> dets, double iou_thresh = 0.5);

/// Greedy clustering, then each kept box becomes the score-weighted mean of
/// its cluster's coordinates; the score stays the seed's. A cluster whose
/// scores sum to zero falls back to the plain mean.
std::vector<Detection> blend_nms(std::span<const Detection> dets, double iou_thresh = 0.5);

enum class NmsMode { Greedy, Blend };
NmsMode parse_nms_mode(const std::string& s);
const char* to_string(NmsMode mode);

/// Suppression applied independently per (image_id, class_id) group. Groups
/// appear in order of first occurrence in the input.
std::vector<Detection> suppress(std::span<const Detection> dets, NmsMode mode,
                                double iou_thresh = 0.5);

/// Detections interchange format, one JSON object per line:
/// {"image_id": str, "bbox": [x_min, y_min, x_max, y_max], "score": float, "class": int}
std::vector<Detection> read_detections_jsonl(std::istream& is);
std::vector<Detection> load_detections_jsonl(const std::string& path);
void write_detections_jsonl(std::ostream& os, std::span<const Detection> dets);
void save_detections_jsonl(const std::string& path, std::span<const Detection> dets);

}  // namespace tigernet
