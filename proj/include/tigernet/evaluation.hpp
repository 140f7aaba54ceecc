#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tigernet/data_io.hpp"
#include "tigernet/postprocess.hpp"

namespace tigernet {

enum class Interpolation { AllPoint, ElevenPoint };
Interpolation parse_interpolation(const std::string& s);
const char* to_string(Interpolation i);

struct PRPoint {
  double recall = 0;
  double precision = 0;
  double score = 0;  // score of the detection closing this prefix
  bool true_positive = false;
};

struct PRCurve {
  std::vector<PRPoint> points;  // one per counted detection, in score order
  double ap = 0;
  int num_gt = 0;  // non-difficult ground truths
  int num_tp = 0;
  int num_fp = 0;
  Interpolation interpolation = Interpolation::AllPoint;
};

struct GroundTruthBox {
  Box box;
  bool difficult = false;
};

struct GroundTruthImage {
  std::string image_id;
  std::vector<GroundTruthBox> boxes;
};

/// Ground truths of one class name, one entry per record.
std::vector<GroundTruthImage> ground_truth_for_class(std::span<const ImageRecord> records,
                                                     const std::string& class_name);

/// VOC-style AP for one class. Detections are ranked by descending score
/// (equal scores keep input order). Each takes the highest-IoU unmatched gt
/// of its image (lowest gt index on ties): TP when IoU >= iou_thresh, FP
/// otherwise; a match to a difficult gt counts as neither. Detections on
/// images absent from `gts` are skipped. AP is 0 when there is no
/// non-difficult gt.
PRCurve average_precision(std::span<const Detection> dets, std::span<const GroundTruthImage> gts,
                          double iou_thresh = 0.5,
                          Interpolation interp = Interpolation::AllPoint);

/// Area under the monotone precision envelope (all-point) or the mean of
/// the envelope sampled at recall 0, 0.1, ..., 1 (11-point).
double interpolate_ap(std::span<const double> recall, std::span<const double> precision,
                      Interpolation interp);

void write_pr_csv(std::ostream& os, const PRCurve& curve);

/// Precision-per-FLOPs under a named house formula. Known names:
///   map_over_gflops   map / gflops
///   map_over_log2_1p  map / log2(1 + gflops)
///   map_over_sqrt     map / sqrt(gflops)
double ppf(double map, double gflops, const std::string& formula);
std::vector<std::string> ppf_formulas();

}  // namespace tigernet
