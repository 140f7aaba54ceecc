#include "tigernet/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tigernet/anchors.hpp"
#include "tigernet/augment_geom.hpp"
#include "tigernet/data_io.hpp"
#include "tigernet/evaluation.hpp"
#include "tigernet/loss_check.hpp"
#include "tigernet/model_graph.hpp"
#include "tigernet/postprocess.hpp"
#include "tigernet/pseudo_label.hpp"

namespace tigernet::cli {
namespace {

using ojson = nlohmann::ordered_json;

struct Globals {
  std::uint64_t seed = 0;
  std::string format = "table";
};

std::string version_text() {
  return std::string("tigernet ") + kLibraryVersion + " (format schema " + kFormatSchemaVersion +
         ")";
}

ClassNames split_names(const std::string& csv) {
  ClassNames names;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) names.push_back(item);
  if (names.size() < 2) throw Error("--classes needs background plus at least one class");
  return names;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  return f;
}

// arch --------------------------------------------------------------------

struct ArchOpts {
  int input = 256;
  std::string config;
  std::string csv;
  int mac = 2;
  bool no_bn_params = false;
  bool sweep = false;
  double target_gflops = 0.071;
  bool dump_config = false;
};

void run_arch(const ArchOpts& o, const Globals& g, std::ostream& out) {
  ArchConfig cfg = o.config.empty() ? default_arch_config() : load_arch_config(o.config);
  if (o.mac != 1 && o.mac != 2) throw Error("--mac must be 1 or 2");
  CostPolicy policy;
  policy.flops_per_mac = o.mac;
  policy.count_batch_norm_params = !o.no_bn_params;

  if (o.dump_config) {
    out << format_arch_config(cfg);
    return;
  }

  if (o.sweep) {
    std::vector<int> sizes;
    for (int s = 128; s <= 320; s += 32) sizes.push_back(s);
    const auto result = sweep_input_size(
        [&](int size) {
          ArchConfig c = cfg;
          c.input = {size, size};
          return build_tigernet(c);
        },
        std::int64_t(std::llround(o.target_gflops * 1e9)), sizes, policy);
    if (g.format == "json") {
      ojson j;
      j["target_flops"] = std::llround(o.target_gflops * 1e9);
      j["convention"] = CostReport{0, 0, policy, {}}.convention();
      j["best_size"] = result.best_size;
      for (const auto& r : result.rows) j["rows"].push_back({{"size", r.size}, {"flops", r.flops}, {"params", r.params}});
      out << j.dump(2) << '\n';
    } else if (g.format == "csv") {
      out << "size,flops,params,best\n";
      for (const auto& r : result.rows)
        out << r.size << ',' << r.flops << ',' << r.params << ','
            << (r.size == result.best_size ? 1 : 0) << '\n';
    } else {
      out << std::setw(6) << "size" << std::setw(14) << "flops" << std::setw(10) << "GFLOPs"
          << std::setw(10) << "params" << '\n';
      for (const auto& r : result.rows)
        out << std::setw(6) << r.size << std::setw(14) << r.flops << std::setw(10) << std::fixed
            << std::setprecision(4) << r.flops / 1e9 << std::defaultfloat << std::setw(10)
            << r.params << (r.size == result.best_size ? "  <- best" : "") << '\n';
      out << "target: " << o.target_gflops << " GFLOPs; "
          << CostReport{0, 0, policy, {}}.convention() << '\n';
    }
    return;
  }

  cfg.input = {o.input, o.input};
  const ModelGraph graph = build_tigernet(cfg);
  const CostReport report = count_cost(graph, policy);
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    write_cost_csv(f, report);
  }
  const auto strides = head_strides(graph);
  if (g.format == "csv") {
    write_cost_csv(out, report);
  } else if (g.format == "json") {
    ojson j;
    j["input"] = {o.input, o.input};
    j["total_params"] = report.total_params;
    j["total_flops"] = report.total_flops;
    j["convention"] = report.convention();
    j["head_strides"] = strides;
    for (const auto& n : report.per_node)
      j["nodes"].push_back({{"node_id", n.node_id},
                            {"kind", to_string(n.kind)},
                            {"params", n.params},
                            {"flops", n.flops},
                            {"out_h", n.output.h},
                            {"out_w", n.output.w},
                            {"out_c", n.output.c}});
    out << j.dump(2) << '\n';
  } else {
    write_cost_table(out, report);
    out << "head strides:";
    for (int s : strides) out << ' ' << s;
    out << '\n';
  }
}

// anchors -----------------------------------------------------------------

void run_anchors(int input, const std::string& out_path, const Globals& g, std::ostream& out) {
  const auto grids = generate_anchors(level_shapes({input, input}));
  if (!out_path.empty()) {
    auto f = open_out(out_path);
    write_anchor_csv(f, grids);
  }
  if (g.format == "csv") {
    if (out_path.empty()) write_anchor_csv(out, grids);
    return;
  }
  std::size_t total = 0;
  ojson j;
  for (const auto& grid : grids) {
    total += grid.anchors.size();
    j["levels"].push_back({{"level", grid.level},
                           {"stride", grid.stride},
                           {"height", grid.height},
                           {"width", grid.width},
                           {"base_size", grid.base_size},
                           {"anchors", grid.anchors.size()}});
  }
  j["total"] = total;
  if (g.format == "json") {
    out << j.dump(2) << '\n';
    return;
  }
  out << "level stride  grid   base  anchors\n";
  for (const auto& grid : grids)
    out << std::setw(5) << grid.level << std::setw(7) << grid.stride << std::setw(4) << grid.height
        << 'x' << std::left << std::setw(3) << grid.width << std::right << std::setw(5)
        << grid.base_size << std::setw(9) << grid.anchors.size() << '\n';
  out << "total anchors: " << total << '\n';
}

// match -------------------------------------------------------------------

void run_match(const std::string& gt_dir, int input, double pos, double neg, const Globals& g,
               std::ostream& out) {
  const auto data = parse_voc(gt_dir);
  const auto anchors = flatten(generate_anchors(level_shapes({input, input})));
  MatchConfig mc;
  mc.pos_iou = pos;
  mc.neg_iou = neg;
  ojson j = ojson::array();
  if (g.format == "csv") out << "image_id,gts,positive,negative,ignore\n";
  else if (g.format == "table")
    out << std::left << std::setw(24) << "image_id" << std::right << std::setw(5) << "gts"
        << std::setw(10) << "positive" << std::setw(10) << "negative" << std::setw(8) << "ignore"
        << '\n';
  for (const auto& r : data.records) {
    const double sx = double(input) / r.width, sy = double(input) / r.height;
    std::vector<Box> gts;
    for (const auto& a : r.annotations)
      gts.push_back({a.box.x_min * sx, a.box.y_min * sy, a.box.x_max * sx, a.box.y_max * sy});
    const auto m = match_anchors(anchors, gts, mc);
    if (g.format == "csv")
      out << r.image_id << ',' << gts.size() << ',' << m.num_positive() << ',' << m.num_negative()
          << ',' << m.num_ignore() << '\n';
    else if (g.format == "json")
      j.push_back({{"image_id", r.image_id},
                   {"gts", gts.size()},
                   {"positive", m.num_positive()},
                   {"negative", m.num_negative()},
                   {"ignore", m.num_ignore()}});
    else
      out << std::left << std::setw(24) << r.image_id << std::right << std::setw(5) << gts.size()
          << std::setw(10) << m.num_positive() << std::setw(10) << m.num_negative() << std::setw(8)
          << m.num_ignore() << '\n';
  }
  if (g.format == "json") out << j.dump(2) << '\n';
}

// loss-check --------------------------------------------------------------

int run_loss_check(int trials, int anchors, double eta, double lambda, const Globals& g,
                   std::ostream& out) {
  DetectionLossConfig cfg;
  cfg.eta = eta;
  cfg.lambda = lambda;
  double worst = 0;
  int checked = 0, skipped = 0;
  if (g.format == "csv") out << "trial,checked,skipped,max_rel_error\n";
  for (int t = 0; t < trials; ++t) {
    const auto inst = random_loss_instance(g.seed + std::uint64_t(t), anchors);
    const auto res = check_gradients(inst, cfg);
    worst = std::max(worst, res.max_rel_error);
    checked += res.checked;
    skipped += res.skipped;
    if (g.format == "csv")
      out << t << ',' << res.checked << ',' << res.skipped << ',' << std::setprecision(6)
          << res.max_rel_error << std::defaultfloat << '\n';
  }
  const bool pass = worst < 1e-4;
  if (g.format == "json") {
    out << ojson{{"trials", trials},
                 {"checked", checked},
                 {"skipped", skipped},
                 {"max_rel_error", worst},
                 {"tolerance", 1e-4},
                 {"pass", pass}}
               .dump(2)
        << '\n';
  } else if (g.format == "table") {
    out << "trials: " << trials << "\nchecked coordinates: " << checked
        << "\nskipped (non-differentiable): " << skipped << "\nmax relative error: "
        << std::setprecision(6) << worst << std::defaultfloat << " (tolerance 1e-4)\n"
        << (pass ? "PASS" : "FAIL") << '\n';
  }
  return pass ? 0 : 1;
}

// nms ---------------------------------------------------------------------

void run_nms(const std::string& dets_path, const std::string& mode, double iou_thresh,
             double score_thresh, const std::string& out_path, std::ostream& out) {
  auto dets = load_detections_jsonl(dets_path);
  std::erase_if(dets, [&](const Detection& d) { return d.score < score_thresh; });
  const auto kept = suppress(dets, parse_nms_mode(mode), iou_thresh);
  if (out_path.empty()) {
    write_detections_jsonl(out, kept);
  } else {
    auto f = open_out(out_path);
    write_detections_jsonl(f, kept);
  }
}

// eval --------------------------------------------------------------------

void run_eval(const std::string& gt_dir, const std::string& dets_path, double iou_thresh,
              const std::string& interp, const std::string& class_name,
              const std::string& classes, const std::string& pr_csv, const Globals& g,
              std::ostream& out) {
  const auto names = split_names(classes);
  const auto it = std::find(names.begin(), names.end(), class_name);
  if (it == names.end() || it == names.begin())
    throw Error("class '" + class_name + "' is not a foreground class of --classes");
  const int class_id = int(it - names.begin());

  const auto data = parse_voc(gt_dir);
  auto dets = load_detections_jsonl(dets_path);
  std::erase_if(dets, [&](const Detection& d) { return d.class_id != class_id; });
  const auto gts = ground_truth_for_class(data.records, class_name);
  const auto curve = average_precision(dets, gts, iou_thresh, parse_interpolation(interp));

  if (!pr_csv.empty()) {
    auto f = open_out(pr_csv);
    write_pr_csv(f, curve);
  }
  if (g.format == "json") {
    ojson j{{"class", class_name}, {"iou", iou_thresh},     {"interpolation", interp},
            {"ap", curve.ap},      {"num_gt", curve.num_gt}, {"num_tp", curve.num_tp},
            {"num_fp", curve.num_fp}};
    j["curve"] = ojson::array();
    for (const auto& p : curve.points)
      j["curve"].push_back({{"score", p.score},
                            {"tp", p.true_positive},
                            {"recall", p.recall},
                            {"precision", p.precision}});
    out << j.dump(2) << '\n';
  } else if (g.format == "csv") {
    out << "class,iou,interpolation,ap,num_gt,num_tp,num_fp\n"
        << class_name << ',' << iou_thresh << ',' << interp << ',' << std::setprecision(17)
        << curve.ap << std::setprecision(6) << ',' << curve.num_gt << ',' << curve.num_tp << ','
        << curve.num_fp << '\n';
  } else {
    out << "AP = " << std::setprecision(17) << curve.ap << std::setprecision(6)
        << " (class " << class_name << ", IoU " << iou_thresh << ", interpolation " << interp
        << ", gt " << curve.num_gt << ", tp " << curve.num_tp << ", fp " << curve.num_fp << ")\n";
    out << std::setw(5) << "rank" << std::setw(10) << "score" << std::setw(4) << "tp"
        << std::setw(10) << "recall" << std::setw(11) << "precision" << '\n';
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      const auto& p = curve.points[i];
      out << std::setw(5) << i + 1 << std::setw(10) << std::fixed << std::setprecision(4)
          << p.score << std::setw(4) << (p.true_positive ? 1 : 0) << std::setw(10) << p.recall
          << std::setw(11) << p.precision << std::defaultfloat << std::setprecision(6) << '\n';
    }
  }
}

// pseudo / merge ----------------------------------------------------------

// Key/value CSV as written by the library, aligned for the terminal unless csv was asked for.
void emit_key_values(const std::string& csv, const Globals& g, std::ostream& out) {
  if (g.format == "csv") {
    out << csv;
    return;
  }
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    const std::string value = line.substr(comma + 1);
    out << std::left << std::setw(30) << line.substr(0, comma) << std::right;
    if (value.find('.') != std::string::npos)
      out << std::stod(value) << '\n';
    else
      out << value << '\n';
  }
}

void print_report(const DistillReport& rep, const Globals& g, std::ostream& out) {
  if (g.format == "json") {
    ojson j{{"human_images", rep.human.images},
            {"human_boxes", rep.human.boxes},
            {"human_mean_boxes_per_image", rep.human.mean_boxes_per_image()},
            {"pseudo_images", rep.pseudo.images},
            {"pseudo_boxes", rep.pseudo.boxes},
            {"pseudo_mean_boxes_per_image", rep.pseudo.mean_boxes_per_image()},
            {"pseudo_unscored_boxes", rep.unscored_pseudo_boxes},
            {"score_histogram", rep.score_histogram}};
    out << j.dump(2) << '\n';
  } else {
    std::ostringstream csv;
    write_distill_csv(csv, rep);
    emit_key_values(csv.str(), g, out);
  }
}

void run_pseudo(const std::string& dets_path, const std::string& sizes_path, double thresh,
                const std::string& mode, double iou_thresh, const std::string& out_dir,
                bool drop_empty, const std::string& classes, const Globals& g, std::ostream& out) {
  PseudoLabelConfig cfg;
  cfg.score_thresh = thresh;
  cfg.nms_mode = parse_nms_mode(mode);
  cfg.iou_thresh = iou_thresh;
  cfg.keep_empty = !drop_empty;
  cfg.class_names = split_names(classes);
  const auto records =
      predictions_to_labels(load_detections_jsonl(dets_path), load_sizes_csv(sizes_path), cfg);
  serialize_voc(records, out_dir);
  print_report(distill_report(records), g, out);
}

void run_merge(const std::string& labeled, const std::string& pseudo, const std::string& out_dir,
               const std::string& policy, const Globals& g, std::ostream& out) {
  const auto merged = merge_datasets(parse_voc(labeled).records, parse_voc(pseudo).records,
                                     parse_dedup_policy(policy));
  serialize_voc(merged, out_dir);
  print_report(distill_report(merged), g, out);
}

// split -------------------------------------------------------------------

void run_split(const std::string& voc, double fraction, const std::string& train_dir,
               const std::string& val_dir, const Globals& g, std::ostream& out) {
  const auto data = parse_voc(voc);
  const auto split = split_dataset(data.records, fraction, g.seed);
  serialize_voc(split.train, train_dir);
  serialize_voc(split.val, val_dir);
  if (g.format == "json") {
    ojson j{{"seed", g.seed}, {"train", ojson::array()}, {"val", ojson::array()}};
    for (const auto& r : split.train) j["train"].push_back(r.image_id);
    for (const auto& r : split.val) j["val"].push_back(r.image_id);
    out << j.dump(2) << '\n';
  } else {
    out << "image_id,split\n";
    for (const auto& r : split.train) out << r.image_id << ",train\n";
    for (const auto& r : split.val) out << r.image_id << ",val\n";
  }
}

// augment-plan ------------------------------------------------------------

struct AugmentOpts {
  std::string voc;
  std::string out;
  std::string out_voc;
  std::string flip;
  double rotate = 0, shift_x = 0, shift_y = 0, scale = 1, min_visibility = 0.25;
  double max_iou = 0.3;
  int attempts = 100;
};

void run_augment(const AugmentOpts& o, const Globals& g, std::ostream& out) {
  auto records = parse_voc(o.voc).records;
  struct Donor {
    std::string image_id;
    Box box;
  };
  std::vector<Donor> pool;
  for (const auto& r : records)
    for (const auto& a : r.annotations)
      if (!a.difficult && a.box.width() > 0 && a.box.height() > 0) pool.push_back({r.image_id, a.box});

  AffineParams affine;
  affine.rotation_deg = o.rotate;
  affine.shift_x = o.shift_x;
  affine.shift_y = o.shift_y;
  affine.scale = o.scale;
  affine.min_visibility = o.min_visibility;
  CutoutConfig cut;
  cut.max_iou_with_existing = o.max_iou;
  cut.max_attempts = o.attempts;

  std::vector<CutoutPlacement> plans;
  std::vector<ImageRecord> augmented;
  int failed = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ImageRecord r = records[i];
    if (o.flip == "h") r = flip_boxes(r, FlipAxis::Horizontal);
    else if (o.flip == "v") r = flip_boxes(r, FlipAxis::Vertical);
    else if (!o.flip.empty()) throw Error("--flip must be h or v");
    r = affine_boxes(r, affine);

    std::mt19937_64 rng(g.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    bool placed = false;
    if (!pool.empty()) {
      const Donor& donor = pool[rng() % pool.size()];
      if (donor.box.width() <= r.width && donor.box.height() <= r.height) {
        auto res = place_cutout(r, donor.image_id, donor.box, rng(), cut);
        if (res.placement) {
          plans.push_back(*res.placement);
          r = std::move(res.record);
          placed = true;
        }
      }
    }
    if (!placed) ++failed;
    augmented.push_back(std::move(r));
  }

  if (!o.out.empty()) {
    auto f = open_out(o.out);
    write_placement_jsonl(f, plans);
  } else {
    write_placement_jsonl(out, plans);
  }
  if (!o.out_voc.empty()) serialize_voc(augmented, o.out_voc);
  if (!o.out.empty()) {
    if (g.format == "json")
      out << ojson{{"images", records.size()}, {"placed", plans.size()}, {"no_placement", failed}}.dump(2)
          << '\n';
    else
      emit_key_values("key,value\nimages," + std::to_string(records.size()) + "\nplaced," +
                          std::to_string(plans.size()) + "\nno_placement," + std::to_string(failed) +
                          "\n",
                      g, out);
  }
}

// stats -------------------------------------------------------------------

void run_stats(const std::string& voc, const Globals& g, std::ostream& out) {
  const auto data = parse_voc(voc);
  const auto s = dataset_stats(data.records);
  if (g.format == "json") {
    ojson j{{"images", s.images},
            {"boxes", s.boxes},
            {"difficult", s.difficult},
            {"empty_images", s.empty_images},
            {"clamped_boxes", data.clamped_boxes}};
    for (const auto& [res, count] : s.resolutions)
      j["resolutions"].push_back({{"width", res.first}, {"height", res.second}, {"images", count}});
    for (const auto& [name, count] : s.classes) j["classes"][name] = count;
    out << j.dump(2) << '\n';
  } else {
    std::ostringstream csv;
    write_stats_csv(csv, s);
    csv << "clamped_boxes," << data.clamped_boxes << '\n';
    emit_key_values(csv.str(), g, out);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TigerNet detector toolkit: architecture accounting, anchors, losses, "
               "suppression, evaluation and pseudo-labelling"};
  app.name("tigernet");
  app.option_defaults()->always_capture_default();
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every randomized step")->always_capture_default();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"table", "csv", "json"}));

  int exit_code = 0;

  ArchOpts arch;
  auto* c_arch = app.add_subcommand("arch", "Build the architecture graph and print its cost report");
  c_arch->add_option("--input", arch.input, "Square input resolution (multiple of 32)");
  c_arch->add_option("--config", arch.config, "Architecture config file (default: built-in profile)");
  c_arch->add_option("--csv", arch.csv, "Also write the per-node cost CSV here");
  c_arch->add_option("--mac", arch.mac, "FLOPs per multiply-accumulate (1 or 2)");
  c_arch->add_flag("--no-bn-params", arch.no_bn_params, "Exclude batch-norm affine parameters");
  c_arch->add_flag("--sweep", arch.sweep, "Sweep input sizes 128..320 step 32");
  c_arch->add_option("--target-gflops", arch.target_gflops, "FLOPs target for --sweep, in GFLOPs");
  c_arch->add_flag("--dump-config", arch.dump_config, "Print the effective config file and exit");
  c_arch->callback([&] { run_arch(arch, g, out); });

  int anchors_input = 256;
  std::string anchors_out;
  auto* c_anchors = app.add_subcommand("anchors", "Generate the six-level anchor lattice");
  c_anchors->add_option("--input", anchors_input, "Square input resolution");
  c_anchors->add_option("--out", anchors_out, "Write the anchor CSV here");
  c_anchors->callback([&] { run_anchors(anchors_input, anchors_out, g, out); });

  std::string match_gt;
  int match_input = 256;
  double match_pos = 0.5, match_neg = 0.4;
  auto* c_match = app.add_subcommand("match", "Assign anchors to ground truth per image");
  c_match->add_option("--gt", match_gt, "VOC annotation directory")->required();
  c_match->add_option("--input", match_input, "Square network input; boxes are resized to it");
  c_match->add_option("--pos", match_pos, "Positive IoU threshold");
  c_match->add_option("--neg", match_neg, "Negative IoU threshold");
  c_match->callback([&] { run_match(match_gt, match_input, match_pos, match_neg, g, out); });

  int lc_trials = 50, lc_anchors = 48;
  double lc_eta = 3.0, lc_lambda = 1.0;
  auto* c_loss = app.add_subcommand("loss-check", "Verify loss gradients by finite differences");
  c_loss->add_option("--trials", lc_trials, "Random instances");
  c_loss->add_option("--anchors", lc_anchors, "Anchors per instance");
  c_loss->add_option("--eta", lc_eta, "Hard negatives per positive");
  c_loss->add_option("--lambda", lc_lambda, "Box loss weight");
  c_loss->callback([&] { exit_code = run_loss_check(lc_trials, lc_anchors, lc_eta, lc_lambda, g, out); });

  std::string nms_dets, nms_mode = "blend", nms_out;
  double nms_iou = 0.5, nms_score = 0.05;
  auto* c_nms = app.add_subcommand("nms", "Suppress overlapping detections per image and class");
  c_nms->add_option("--dets", nms_dets, "Detections JSONL")->required();
  c_nms->add_option("--mode", nms_mode, "greedy or blend")->check(CLI::IsMember({"greedy", "blend"}));
  c_nms->add_option("--iou", nms_iou, "IoU at or above which boxes are clustered");
  c_nms->add_option("--score-thresh", nms_score, "Drop detections scoring below this first");
  c_nms->add_option("--out", nms_out, "Output JSONL (default: stdout)");
  c_nms->callback([&] { run_nms(nms_dets, nms_mode, nms_iou, nms_score, nms_out, out); });

  std::string ev_gt, ev_dets, ev_interp = "all", ev_class = "tiger", ev_pr,
                              ev_classes = "background,tiger";
  double ev_iou = 0.5;
  auto* c_eval = app.add_subcommand("eval", "VOC-style average precision");
  c_eval->add_option("--gt", ev_gt, "VOC annotation directory")->required();
  c_eval->add_option("--dets", ev_dets, "Detections JSONL")->required();
  c_eval->add_option("--iou", ev_iou, "Match IoU threshold");
  c_eval->add_option("--interp", ev_interp, "all (all-point) or 11 (11-point)")
      ->check(CLI::IsMember({"all", "11"}));
  c_eval->add_option("--class", ev_class, "Class name to evaluate");
  c_eval->add_option("--classes", ev_classes, "Class names by id, background first");
  c_eval->add_option("--pr-csv", ev_pr, "Write the precision/recall curve CSV here");
  c_eval->callback(
      [&] { run_eval(ev_gt, ev_dets, ev_iou, ev_interp, ev_class, ev_classes, ev_pr, g, out); });

  std::string ps_dets, ps_sizes, ps_mode = "blend", ps_out, ps_classes = "background,tiger";
  double ps_thresh = 0.5, ps_iou = 0.5;
  bool ps_drop_empty = false;
  auto* c_pseudo = app.add_subcommand("pseudo", "Turn teacher detections into VOC pseudo-labels");
  c_pseudo->add_option("--dets", ps_dets, "Teacher detections JSONL")->required();
  c_pseudo->add_option("--sizes", ps_sizes, "CSV image_id,width,height")->required();
  c_pseudo->add_option("--thresh", ps_thresh, "Minimum teacher score (0 keeps raw predictions)");
  c_pseudo->add_option("--mode", ps_mode, "Suppression: greedy or blend")
      ->check(CLI::IsMember({"greedy", "blend"}));
  c_pseudo->add_option("--iou", ps_iou, "Suppression IoU threshold");
  c_pseudo->add_option("--out", ps_out, "Output VOC directory")->required();
  c_pseudo->add_flag("--drop-empty", ps_drop_empty, "Skip images left without boxes");
  c_pseudo->add_option("--classes", ps_classes, "Class names by id, background first");
  c_pseudo->callback([&] {
    run_pseudo(ps_dets, ps_sizes, ps_thresh, ps_mode, ps_iou, ps_out, ps_drop_empty, ps_classes, g,
               out);
  });

  std::string mg_labeled, mg_pseudo, mg_out, mg_policy = "prefer_labeled";
  auto* c_merge = app.add_subcommand("merge", "Merge labeled and pseudo-labeled VOC sets");
  c_merge->add_option("--labeled", mg_labeled, "Labeled VOC directory")->required();
  c_merge->add_option("--pseudo", mg_pseudo, "Pseudo-labeled VOC directory")->required();
  c_merge->add_option("--out", mg_out, "Output VOC directory")->required();
  c_merge->add_option("--policy", mg_policy, "Image id collisions: prefer_labeled or error")
      ->check(CLI::IsMember({"prefer_labeled", "error"}));
  c_merge->callback([&] { run_merge(mg_labeled, mg_pseudo, mg_out, mg_policy, g, out); });

  std::string sp_voc, sp_train, sp_val;
  double sp_fraction = 0.8;
  auto* c_split = app.add_subcommand("split", "Random image-level train/validation split");
  c_split->add_option("--voc", sp_voc, "VOC annotation directory")->required();
  c_split->add_option("--fraction", sp_fraction, "Training fraction");
  c_split->add_option("--train", sp_train, "Output directory for the training split")->required();
  c_split->add_option("--val", sp_val, "Output directory for the validation split")->required();
  c_split->callback([&] { run_split(sp_voc, sp_fraction, sp_train, sp_val, g, out); });

  AugmentOpts aug;
  auto* c_aug = app.add_subcommand("augment-plan", "Plan geometric augmentations and tiger cutouts");
  c_aug->add_option("--voc", aug.voc, "VOC annotation directory")->required();
  c_aug->add_option("--out", aug.out, "Placement plan JSONL (default: stdout)");
  c_aug->add_option("--out-voc", aug.out_voc, "Also write augmented annotations here");
  c_aug->add_option("--flip", aug.flip, "Flip boxes first: h or v");
  c_aug->add_option("--rotate", aug.rotate, "Rotation in degrees about the image center");
  c_aug->add_option("--shift-x", aug.shift_x, "Horizontal shift in pixels");
  c_aug->add_option("--shift-y", aug.shift_y, "Vertical shift in pixels");
  c_aug->add_option("--scale", aug.scale, "Scale factor about the image center");
  c_aug->add_option("--min-visibility", aug.min_visibility, "Minimum visible fraction after clipping");
  c_aug->add_option("--max-iou", aug.max_iou, "Cutout overlap budget against existing boxes");
  c_aug->add_option("--attempts", aug.attempts, "Cutout rejection-sampling budget");
  c_aug->callback([&] { run_augment(aug, g, out); });

  std::string st_voc;
  auto* c_stats = app.add_subcommand("stats", "Dataset statistics");
  c_stats->add_option("--voc", st_voc, "VOC annotation directory")->required();
  c_stats->callback([&] { run_stats(st_voc, g, out); });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << version_text() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}

}  // namespace tigernet::cli
