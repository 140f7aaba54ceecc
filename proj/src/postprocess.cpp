#include "tigernet/postprocess.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"

namespace tigernet {

FlatPredictions flatten_heads(const std::vector<HeadOutput<double>>& heads,
                              const std::vector<AnchorGrid>& grids, int num_classes) {
  if (heads.size() != grids.size()) throw Error("flatten_heads: one head per anchor level required");
  std::size_t total = 0;
  for (const auto& g : grids) total += g.anchors.size();

  FlatPredictions out;
  out.logits.resize(Eigen::Index(total), num_classes);
  out.box.resize(Eigen::Index(total), 4);
  Eigen::Index row = 0;
  for (std::size_t l = 0; l < grids.size(); ++l) {
    const auto& g = grids[l];
    const auto& h = heads[l];
    const int A = int(g.scales.size() * g.ratios.size());
    if (h.cls.dimension(0) != A * num_classes || h.box.dimension(0) != 4 * A ||
        h.cls.dimension(1) != g.height || h.cls.dimension(2) != g.width ||
        h.box.dimension(1) != g.height || h.box.dimension(2) != g.width)
      throw ShapeError("flatten_heads: level " + std::to_string(l) +
                       " head shape does not match its anchor grid");
    for (int i = 0; i < g.height; ++i)
      for (int j = 0; j < g.width; ++j)
        for (int a = 0; a < A; ++a, ++row) {
          for (int k = 0; k < num_classes; ++k) out.logits(row, k) = h.cls(a * num_classes + k, i, j);
          for (int k = 0; k < 4; ++k) out.box(row, k) = h.box(4 * a + k, i, j);
        }
  }
  return out;
}

std::vector<Detection> decode_detections(const FlatPredictions& preds, std::span<const Box> anchors,
                                         double score_thresh, Extent2 clip_to,
                                         const std::string& image_id,
                                         const BoxVariances<double>& variances) {
  if (preds.logits.rows() != Eigen::Index(anchors.size()) ||
      preds.box.rows() != Eigen::Index(anchors.size()))
    throw ShapeError("decode_detections: prediction rows do not match anchor count");
  const RowMatrix<double> probs = softmax<double>(preds.logits);
  std::vector<Detection> dets;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index k = 1; k < probs.cols(); ++k) {
      if (!(probs(i, k) >= score_thresh)) continue;
      const Eigen::Vector4d offsets = preds.box.row(i).transpose();
      const Box b = clip(decode_box(anchors[std::size_t(i)], offsets, variances),
                         double(clip_to.w), double(clip_to.h));
      dets.push_back({image_id, b, probs(i, k), int(k)});
    }
  return dets;
}

std::vector<Detection> decode_detections(const std::vector<HeadOutput<double>>& heads,
                                         const std::vector<AnchorGrid>& grids, int num_classes,
                                         double score_thresh, Extent2 clip_to,
                                         const std::string& image_id) {
  const auto anchors = flatten(grids);
  return decode_detections(flatten_heads(heads, grids, num_classes), anchors, score_thresh, clip_to,
                           image_id);
}

std::vector<int> score_order(std::span<const Detection> dets) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dets[a].score > dets[b].score; });
  return order;
}

std::vector<int> greedy_nms_indices(std::span<const Detection> dets, double iou_thresh) {
  std::vector<int> kept;
  for (int i : score_order(dets)) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](int k) {
      return iou(dets[k].box, dets[i].box) >= iou_thresh;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<Detection> greedy_nms(std::span<const Detection> dets, double iou_thresh) {
  std::vector<Detection> out;
  for (int i : greedy_nms_indices(dets, iou_thresh)) out.push_back(dets[i]);
  return out;
}

std::vector<Cluster> blend_clusters(std::span<const Detection> dets, double iou_thresh) {
  const auto order = score_order(dets);
  std::vector<bool> claimed(dets.size(), false);
  std::vector<Cluster> clusters;
  for (std::size_t p = 0; p < order.size(); ++p) {
    const int seed = order[p];
    if (claimed[seed]) continue;
    Cluster c{seed, {seed}};
    claimed[seed] = true;
    for (std::size_t q = p + 1; q < order.size(); ++q) {
      const int j = order[q];
      if (!claimed[j] && iou(dets[seed].box, dets[j].box) >= iou_thresh) {
        claimed[j] = true;
        c.members.push_back(j);
      }
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<Detection> blend_nms(std::span<const Detection> dets, double iou_thresh) {
  std::vector<Detection> out;
  for (const auto& c : blend_clusters(dets, iou_thresh)) {
    // Offsets from the seed keep the mean exact when members coincide.
    const Eigen::Vector4d seed = dets[c.seed].box.as_vector();
    Eigen::Vector4d weighted = Eigen::Vector4d::Zero();
    Eigen::Vector4d plain = Eigen::Vector4d::Zero();
    double weight = 0;
    for (int m : c.members) {
      const Eigen::Vector4d delta = dets[m].box.as_vector() - seed;
      weighted += dets[m].score * delta;
      plain += delta;
      weight += dets[m].score;
    }
    Detection d = dets[c.seed];
    if (c.members.size() > 1)
      d.box = Box::from_vector(seed + (weight > 0 ? Eigen::Vector4d(weighted / weight)
                                                  : Eigen::Vector4d(plain / double(c.members.size()))));
    out.push_back(std::move(d));
  }
  return out;
}

NmsMode parse_nms_mode(const std::string& s) {
  if (s == "greedy") return NmsMode::Greedy;
  if (s == "blend") return NmsMode::Blend;
  throw Error("unknown suppression mode '" + s + "' (expected greedy|blend)");
}

const char* to_string(NmsMode mode) { return mode == NmsMode::Greedy ? "greedy" : "blend"; }

std::vector<Detection> suppress(std::span<const Detection> dets, NmsMode mode, double iou_thresh) {
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<Detection>> groups;
  for (const auto& d : dets) {
    auto key = std::make_pair(d.image_id, d.class_id);
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) keys.push_back(key);
    it->second.push_back(d);
  }
  std::vector<Detection> out;
  for (const auto& key : keys) {
    const auto& g = groups[key];
    auto kept = mode == NmsMode::Greedy ? greedy_nms(g, iou_thresh) : blend_nms(g, iou_thresh);
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<Detection> read_detections_jsonl(std::istream& is) {
  std::vector<Detection> dets;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.image_id = j.at("image_id").get<std::string>();
      const auto& b = j.at("bbox");
      if (!b.is_array() || b.size() != 4) throw Error("bbox must have 4 numbers");
      d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      d.score = j.at("score").get<double>();
      d.class_id = j.contains("class") ? j.at("class").get<int>() : 1;
      if (!d.box.valid()) throw Error("invalid box");
      if (!(d.score >= 0 && d.score <= 1)) throw Error("score outside [0,1]");
      dets.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("detections line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError("detections line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return dets;
}

std::vector<Detection> load_detections_jsonl(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open detections file '" + path + "'");
  try {
    return read_detections_jsonl(f);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_detections_jsonl(std::ostream& os, std::span<const Detection> dets) {
  for (const auto& d : dets) {
    nlohmann::ordered_json j;
    j["image_id"] = d.image_id;
    j["bbox"] = {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max};
    j["score"] = d.score;
    j["class"] = d.class_id;
    os << j.dump() << '\n';
  }
}

void save_detections_jsonl(const std::string& path, std::span<const Detection> dets) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write detections file '" + path + "'");
  write_detections_jsonl(f, dets);
}

}  // namespace tigernet
