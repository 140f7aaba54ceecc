#include "tigernet/pseudo_label.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace tigernet {

std::vector<ImageRecord> predictions_to_labels(std::span<const Detection> dets,
                                               std::span<const ImageSize> image_sizes,
                                               const PseudoLabelConfig& config) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < image_sizes.size(); ++i)
    if (!index.emplace(image_sizes[i].image_id, i).second)
      throw Error("duplicate image '" + image_sizes[i].image_id + "' in image sizes");

  std::vector<std::vector<Detection>> per_image(image_sizes.size());
  for (const auto& d : dets) {
    const auto it = index.find(d.image_id);
    if (it == index.end())
      throw Error("detection references unknown image '" + d.image_id + "'");
    if (d.class_id <= 0 || std::size_t(d.class_id) >= config.class_names.size())
      throw Error("detection on '" + d.image_id + "' has unknown class " +
                  std::to_string(d.class_id));
    per_image[it->second].push_back(d);
  }

  std::vector<ImageRecord> out;
  for (std::size_t i = 0; i < image_sizes.size(); ++i) {
    const auto& size = image_sizes[i];
    ImageRecord r;
    r.image_id = size.image_id;
    r.width = size.width;
    r.height = size.height;
    r.provenance = Provenance::Pseudo;
    for (const auto& d : suppress(per_image[i], config.nms_mode, config.iou_thresh)) {
      if (d.score < config.score_thresh) continue;
      r.annotations.push_back(
          {config.class_names[std::size_t(d.class_id)], d.box, false, d.score});
    }
    sanitize(r);
    if (r.annotations.empty() && !config.keep_empty) continue;
    out.push_back(std::move(r));
  }
  return out;
}

DedupPolicy parse_dedup_policy(const std::string& s) {
  if (s == "prefer_labeled") return DedupPolicy::PreferLabeled;
  if (s == "error") return DedupPolicy::Error;
  throw Error("unknown dedup policy '" + s + "' (expected prefer_labeled|error)");
}

std::vector<ImageRecord> merge_datasets(std::span<const ImageRecord> labeled,
                                        std::span<const ImageRecord> pseudo, DedupPolicy policy) {
  std::set<std::string> seen;
  std::vector<ImageRecord> out;
  for (const auto& r : labeled) {
    if (!seen.insert(r.image_id).second)
      throw Error("duplicate image '" + r.image_id + "' in the labeled set");
    out.push_back(r);
  }
  for (const auto& r : pseudo) {
    if (seen.count(r.image_id)) {
      if (policy == DedupPolicy::Error)
        throw Error("image '" + r.image_id + "' appears in both labeled and pseudo sets");
      continue;
    }
    seen.insert(r.image_id);
    out.push_back(r);
  }
  return out;
}

DistillReport distill_report(std::span<const ImageRecord> merged) {
  DistillReport rep;
  for (const auto& r : merged) {
    auto& counts = r.provenance == Provenance::Human ? rep.human : rep.pseudo;
    ++counts.images;
    counts.boxes += int(r.annotations.size());
    if (r.provenance != Provenance::Pseudo) continue;
    for (const auto& a : r.annotations) {
      if (!a.score) {
        ++rep.unscored_pseudo_boxes;
        continue;
      }
      const int bin = std::clamp(int(*a.score * 10.0), 0, 9);
      ++rep.score_histogram[std::size_t(bin)];
    }
  }
  return rep;
}

void write_distill_csv(std::ostream& os, const DistillReport& rep) {
  const auto old = os.precision(17);
  os << "key,value\n"
     << "human_images," << rep.human.images << '\n'
     << "human_boxes," << rep.human.boxes << '\n'
     << "human_mean_boxes_per_image," << rep.human.mean_boxes_per_image() << '\n'
     << "pseudo_images," << rep.pseudo.images << '\n'
     << "pseudo_boxes," << rep.pseudo.boxes << '\n'
     << "pseudo_mean_boxes_per_image," << rep.pseudo.mean_boxes_per_image() << '\n'
     << "pseudo_unscored_boxes," << rep.unscored_pseudo_boxes << '\n';
  for (std::size_t b = 0; b < rep.score_histogram.size(); ++b)
    os << "score_bin_" << b << "," << rep.score_histogram[b] << '\n';
  os.precision(old);
}

}  // namespace tigernet
