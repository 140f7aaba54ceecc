#include "tigernet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace tigernet {

Interpolation parse_interpolation(const std::string& s) {
  if (s == "all") return Interpolation::AllPoint;
  if (s == "11") return Interpolation::ElevenPoint;
  throw Error("unknown interpolation '" + s + "' (expected all|11)");
}

const char* to_string(Interpolation i) { return i == Interpolation::AllPoint ? "all" : "11"; }

std::vector<GroundTruthImage> ground_truth_for_class(std::span<const ImageRecord> records,
                                                     const std::string& class_name) {
  std::vector<GroundTruthImage> out;
  for (const auto& r : records) {
    GroundTruthImage g{r.image_id, {}};
    for (const auto& a : r.annotations)
      if (a.name == class_name) g.boxes.push_back({a.box, a.difficult});
    out.push_back(std::move(g));
  }
  return out;
}

double interpolate_ap(std::span<const double> recall, std::span<const double> precision,
                      Interpolation interp) {
  const std::size_t n = recall.size();
  if (n == 0) return 0.0;
  if (interp == Interpolation::ElevenPoint) {
    double sum = 0;
    for (int t = 0; t <= 10; ++t) {
      const double r = t / 10.0;
      double best = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (recall[i] >= r - 1e-12) best = std::max(best, precision[i]);
      sum += best;
    }
    return sum / 11.0;
  }
  std::vector<double> mrec{0.0}, mpre{0.0};
  mrec.insert(mrec.end(), recall.begin(), recall.end());
  mpre.insert(mpre.end(), precision.begin(), precision.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i > 0; --i) mpre[i - 1] = std::max(mpre[i - 1], mpre[i]);
  double ap = 0;
  for (std::size_t i = 1; i < mrec.size(); ++i)
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  return ap;
}

PRCurve average_precision(std::span<const Detection> dets, std::span<const GroundTruthImage> gts,
                          double iou_thresh, Interpolation interp) {
  std::map<std::string, std::size_t> image_index;
  PRCurve curve;
  curve.interpolation = interp;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!image_index.emplace(gts[i].image_id, i).second)
      throw Error("duplicate image id '" + gts[i].image_id + "' in ground truth");
    for (const auto& g : gts[i].boxes)
      if (!g.difficult) ++curve.num_gt;
  }

  std::vector<std::vector<bool>> used(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) used[i].assign(gts[i].boxes.size(), false);

  std::vector<double> recall, precision;
  int tp = 0, fp = 0;
  for (int d : score_order(dets)) {
    const auto it = image_index.find(dets[d].image_id);
    if (it == image_index.end()) continue;
    const auto& image = gts[it->second];
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < image.boxes.size(); ++g) {
      if (used[it->second][g]) continue;
      const double o = iou(dets[d].box, image.boxes[g].box);
      if (o > best_iou) {
        best_iou = o;
        best = int(g);
      }
    }
    bool is_tp = false;
    if (best >= 0 && best_iou >= iou_thresh) {
      used[it->second][std::size_t(best)] = true;
      if (image.boxes[std::size_t(best)].difficult) continue;
      is_tp = true;
      ++tp;
    } else {
      ++fp;
    }
    const double rec = curve.num_gt > 0 ? double(tp) / curve.num_gt : 0.0;
    const double prec = double(tp) / double(tp + fp);
    curve.points.push_back({rec, prec, dets[d].score, is_tp});
    recall.push_back(rec);
    precision.push_back(prec);
  }
  curve.num_tp = tp;
  curve.num_fp = fp;
  curve.ap = curve.num_gt > 0 ? interpolate_ap(recall, precision, interp) : 0.0;
  return curve;
}

void write_pr_csv(std::ostream& os, const PRCurve& curve) {
  const auto old = os.precision(17);
  os << "rank,score,tp,recall,precision\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    os << i + 1 << ',' << p.score << ',' << (p.true_positive ? 1 : 0) << ',' << p.recall << ','
       << p.precision << '\n';
  }
  os.precision(old);
}

std::vector<std::string> ppf_formulas() {
  return {"map_over_gflops", "map_over_log2_1p", "map_over_sqrt"};
}

double ppf(double map, double gflops, const std::string& formula) {
  if (!(gflops > 0)) throw Error("ppf: gflops must be positive");
  if (formula == "map_over_gflops") return map / gflops;
  if (formula == "map_over_log2_1p") return map / std::log2(1.0 + gflops);
  if (formula == "map_over_sqrt") return map / std::sqrt(gflops);
  throw Error("ppf: unknown formula '" + formula + "'");
}

}  // namespace tigernet
