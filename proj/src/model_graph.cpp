#include "tigernet/model_graph.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace tigernet {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Input: return "Input";
    case LayerKind::Conv2d: return "Conv2d";
    case LayerKind::DepthwiseConv2d: return "DepthwiseConv2d";
    case LayerKind::PointwiseConv2d: return "PointwiseConv2d";
    case LayerKind::SeparableConv2d: return "SeparableConv2d";
    case LayerKind::Upsample2x: return "Upsample2x";
    case LayerKind::Add: return "Add";
    case LayerKind::MaxPool: return "MaxPool";
    case LayerKind::GlobalPool: return "GlobalPool";
  }
  return "?";
}

std::ostream& operator<<(std::ostream& os, const Shape& s) {
  return os << s.c << 'x' << s.h << 'x' << s.w;
}

SeparableParts expand_separable(const LayerSpec& sep) {
  SeparableParts parts;
  parts.depthwise = sep;
  parts.depthwise.kind = LayerKind::DepthwiseConv2d;
  parts.depthwise.out_channels = sep.in_channels;

  parts.pointwise = sep;
  parts.pointwise.kind = LayerKind::PointwiseConv2d;
  parts.pointwise.kernel = {1, 1};
  parts.pointwise.stride = {1, 1};
  parts.pointwise.padding = {0, 0};
  parts.pointwise.inputs.clear();
  return parts;
}

const LayerSpec& ModelGraph::node(const std::string& id) const {
  for (const auto& [name, spec] : nodes)
    if (name == id) return spec;
  throw Error("unknown node '" + id + "'");
}

std::optional<std::size_t> ModelGraph::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].first == id) return i;
  return std::nullopt;
}

namespace {

bool is_conv(LayerKind k) {
  return k == LayerKind::Conv2d || k == LayerKind::DepthwiseConv2d ||
         k == LayerKind::PointwiseConv2d || k == LayerKind::SeparableConv2d;
}

std::size_t expected_inputs(LayerKind k) {
  switch (k) {
    case LayerKind::Input: return 0;
    case LayerKind::Add: return 0;  // variadic, >= 2
    default: return 1;
  }
}

}  // namespace

void validate(const ModelGraph& graph) {
  if (graph.nodes.empty()) throw Error("graph has no nodes");
  if (graph.nodes.front().second.kind != LayerKind::Input)
    throw Error("first node '" + graph.nodes.front().first + "' must be Input");
  if (graph.input_resolution.h <= 0 || graph.input_resolution.w <= 0)
    throw Error("input resolution must be positive");

  std::set<std::string> seen;
  for (const auto& [id, spec] : graph.nodes) {
    if (id.empty()) throw Error("empty node id");
    if (seen.count(id)) throw Error("duplicate node id '" + id + "'");
    if (spec.kind == LayerKind::Input && !seen.empty())
      throw Error("node '" + id + "': only the first node may be Input");
    for (const auto& in : spec.inputs)
      if (!seen.count(in))
        throw Error("node '" + id + "' consumes '" + in + "' which does not precede it");

    const std::size_t want = expected_inputs(spec.kind);
    if (spec.kind == LayerKind::Add) {
      if (spec.inputs.size() < 2) throw Error("Add node '" + id + "' needs at least two inputs");
    } else if (spec.inputs.size() != want) {
      throw Error("node '" + id + "' expects " + std::to_string(want) + " input(s)");
    }

    if (spec.kind == LayerKind::Input && spec.out_channels <= 0)
      throw Error("Input node '" + id + "' needs a positive channel count");
    if (is_conv(spec.kind)) {
      if (spec.in_channels <= 0 || spec.out_channels <= 0)
        throw Error("node '" + id + "' has a zero channel count");
      if (spec.kernel.h <= 0 || spec.kernel.w <= 0 || spec.stride.h <= 0 || spec.stride.w <= 0 ||
          spec.padding.h < 0 || spec.padding.w < 0)
        throw Error("node '" + id + "' has an invalid kernel/stride/padding");
    }
    if (spec.kind == LayerKind::DepthwiseConv2d && spec.in_channels != spec.out_channels)
      throw Error("depthwise node '" + id + "' requires in_channels == out_channels");
    if (spec.kind == LayerKind::PointwiseConv2d && (spec.kernel.h != 1 || spec.kernel.w != 1))
      throw Error("pointwise node '" + id + "' requires a 1x1 kernel");
    seen.insert(id);
  }
  for (const auto& out : graph.outputs)
    if (!seen.count(out)) throw Error("output '" + out + "' is not a node");
  for (const auto& h : graph.heads)
    for (const auto* id : {&h.feature, &h.cls, &h.box})
      if (!seen.count(*id)) throw Error("head node '" + *id + "' is not a node");
}

int conv_output_extent(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

std::vector<Shape> infer_shapes(const ModelGraph& graph) {
  validate(graph);
  std::vector<Shape> shapes;
  shapes.reserve(graph.nodes.size());
  std::map<std::string, std::size_t> index;

  for (const auto& [id, spec] : graph.nodes) {
    auto input_shape = [&](std::size_t k) { return shapes[index.at(spec.inputs[k])]; };
    Shape out;
    switch (spec.kind) {
      case LayerKind::Input:
        out = {spec.out_channels, graph.input_resolution.h, graph.input_resolution.w};
        break;
      case LayerKind::Conv2d:
      case LayerKind::DepthwiseConv2d:
      case LayerKind::PointwiseConv2d:
      case LayerKind::SeparableConv2d:
      case LayerKind::MaxPool: {
        const Shape in = input_shape(0);
        if (spec.kind != LayerKind::MaxPool && in.c != spec.in_channels) {
          std::ostringstream msg;
          msg << "node '" << id << "' expects " << spec.in_channels << " input channels but '"
              << spec.inputs[0] << "' produces " << in.c;
          throw ShapeError(msg.str());
        }
        out.c = spec.kind == LayerKind::MaxPool ? in.c : spec.out_channels;
        out.h = conv_output_extent(in.h, spec.kernel.h, spec.stride.h, spec.padding.h);
        out.w = conv_output_extent(in.w, spec.kernel.w, spec.stride.w, spec.padding.w);
        break;
      }
      case LayerKind::Upsample2x: {
        const Shape in = input_shape(0);
        out = {in.c, in.h * 2, in.w * 2};
        break;
      }
      case LayerKind::Add: {
        out = input_shape(0);
        for (std::size_t k = 1; k < spec.inputs.size(); ++k) {
          const Shape other = input_shape(k);
          if (!(other == out)) {
            std::ostringstream msg;
            msg << "Add node '" << id << "': input '" << spec.inputs[0] << "' has shape " << out
                << " but '" << spec.inputs[k] << "' has shape " << other;
            throw ShapeError(msg.str());
          }
        }
        break;
      }
      case LayerKind::GlobalPool:
        out = {input_shape(0).c, 1, 1};
        break;
    }
    if (out.h <= 0 || out.w <= 0) {
      std::ostringstream msg;
      msg << "node '" << id << "' has empty output " << out;
      throw ShapeError(msg.str());
    }
    index[id] = shapes.size();
    shapes.push_back(out);
  }
  return shapes;
}

std::vector<int> head_strides(const ModelGraph& graph) {
  const auto shapes = infer_shapes(graph);
  std::vector<int> strides;
  for (const auto& head : graph.heads) {
    const Shape s = shapes[*graph.index_of(head.feature)];
    if (graph.input_resolution.h % s.h != 0 || graph.input_resolution.w % s.w != 0 ||
        graph.input_resolution.h / s.h != graph.input_resolution.w / s.w)
      throw ShapeError("head '" + head.feature + "' has no integral stride");
    strides.push_back(graph.input_resolution.h / s.h);
  }
  return strides;
}

std::int64_t layer_params(const LayerSpec& spec, const CostPolicy& policy) {
  const std::int64_t kk = std::int64_t(spec.kernel.h) * spec.kernel.w;
  const std::int64_t cin = spec.in_channels, cout = spec.out_channels;
  auto extras = [&](std::int64_t channels) {
    std::int64_t n = 0;
    if (spec.has_bias) n += channels;
    if (spec.batch_norm && policy.count_batch_norm_params) n += 2 * channels;
    return n;
  };
  switch (spec.kind) {
    case LayerKind::Conv2d: return kk * cin * cout + extras(cout);
    case LayerKind::DepthwiseConv2d: return kk * cin + extras(cin);
    case LayerKind::PointwiseConv2d: return cin * cout + extras(cout);
    case LayerKind::SeparableConv2d: {
      const auto parts = expand_separable(spec);
      return layer_params(parts.depthwise, policy) + layer_params(parts.pointwise, policy);
    }
    default: return 0;
  }
}

std::int64_t layer_flops(const LayerSpec& spec, const std::vector<Shape>& input_shapes,
                         const Shape& output, const CostPolicy& policy) {
  const std::int64_t area = std::int64_t(output.h) * output.w;
  const std::int64_t elements = area * output.c;
  const std::int64_t kk = std::int64_t(spec.kernel.h) * spec.kernel.w;
  auto conv = [&](std::int64_t weights, std::int64_t cout) {
    std::int64_t f = policy.flops_per_mac * weights * area;
    if (spec.has_bias && policy.count_bias_adds) f += area * cout;
    return f;
  };
  switch (spec.kind) {
    case LayerKind::Conv2d:
      return conv(kk * spec.in_channels * spec.out_channels, spec.out_channels);
    case LayerKind::DepthwiseConv2d: return conv(kk * spec.in_channels, spec.in_channels);
    case LayerKind::PointwiseConv2d:
      return conv(std::int64_t(spec.in_channels) * spec.out_channels, spec.out_channels);
    case LayerKind::SeparableConv2d: {
      const auto parts = expand_separable(spec);
      const Shape mid{spec.in_channels, output.h, output.w};
      return layer_flops(parts.depthwise, input_shapes, mid, policy) +
             layer_flops(parts.pointwise, {mid}, output, policy);
    }
    case LayerKind::Add:
      return elements * std::int64_t(input_shapes.size() - 1);
    case LayerKind::MaxPool: return elements * (kk - 1);
    case LayerKind::GlobalPool:
      return std::int64_t(input_shapes.at(0).h) * input_shapes.at(0).w * output.c;
    case LayerKind::Upsample2x:
    case LayerKind::Input: return 0;
  }
  return 0;
}

std::string CostReport::convention() const {
  std::ostringstream os;
  os << "MAC=" << policy.flops_per_mac << " FLOPs; bias adds "
     << (policy.count_bias_adds ? "counted" : "not counted") << "; batch-norm params "
     << (policy.count_batch_norm_params ? "counted" : "not counted")
     << "; normalization/activation FLOPs not counted";
  return os.str();
}

CostReport count_cost(const ModelGraph& graph, const CostPolicy& policy) {
  const auto shapes = infer_shapes(graph);
  CostReport report;
  report.policy = policy;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& [id, spec] = graph.nodes[i];
    std::vector<Shape> ins;
    for (const auto& in : spec.inputs) ins.push_back(shapes[*graph.index_of(in)]);
    NodeCost cost{id, spec.kind, layer_params(spec, policy),
                  layer_flops(spec, ins, shapes[i], policy), shapes[i]};
    report.total_params += cost.params;
    report.total_flops += cost.flops;
    report.per_node.push_back(std::move(cost));
  }
  return report;
}

void write_cost_csv(std::ostream& os, const CostReport& report) {
  os << "node_id,kind,params,flops,out_h,out_w,out_c\n";
  for (const auto& n : report.per_node)
    os << n.node_id << ',' << to_string(n.kind) << ',' << n.params << ',' << n.flops << ','
       << n.output.h << ',' << n.output.w << ',' << n.output.c << '\n';
}

void write_cost_table(std::ostream& os, const CostReport& report) {
  os << std::left << std::setw(22) << "node" << std::setw(18) << "kind" << std::right
     << std::setw(16) << "output" << std::setw(12) << "params" << std::setw(14) << "flops"
     << '\n';
  for (const auto& n : report.per_node) {
    std::ostringstream shape;
    shape << n.output;
    os << std::left << std::setw(22) << n.node_id << std::setw(18) << to_string(n.kind)
       << std::right << std::setw(16) << shape.str() << std::setw(12) << n.params
       << std::setw(14) << n.flops << '\n';
  }
  os << "total params: " << report.total_params << '\n'
     << "total flops:  " << report.total_flops << " (" << std::fixed << std::setprecision(4)
     << double(report.total_flops) / 1e9 << " GFLOPs)\n"
     << std::defaultfloat << "convention:   " << report.convention() << '\n';
}

ArchConfig default_arch_config() { return ArchConfig{}; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (is.fail()) throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
  std::string rest;
  if (is >> rest) throw ConfigError("config key '" + key + "': trailing text '" + rest + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace

ArchConfig parse_arch_config(const std::string& text) {
  ArchConfig cfg;
  std::istringstream in(text);
  std::string line;
  bool in_backbone = false;
  bool backbone_cleared = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[backbone]") {
      in_backbone = true;
      continue;
    }
    if (in_backbone) {
      if (!backbone_cleared) {
        cfg.backbone.clear();
        backbone_cleared = true;
      }
      std::istringstream row(line);
      BackboneStage st;
      if (!(row >> st.out_channels >> st.stride >> st.repeat))
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": backbone rows are 'out_channels stride repeat'");
      cfg.backbone.push_back(st);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "input") {
      std::istringstream is(value);
      if (!(is >> cfg.input.h)) throw ConfigError("config key 'input': expected 'H W' or 'S'");
      if (!(is >> cfg.input.w)) cfg.input.w = cfg.input.h;
    } else if (key == "in_channels") {
      cfg.in_channels = parse_value<int>(key, value);
    } else if (key == "stem_channels") {
      cfg.stem_channels = parse_value<int>(key, value);
    } else if (key == "stem_stride") {
      cfg.stem_stride = parse_value<int>(key, value);
    } else if (key == "width_multiplier") {
      cfg.width_multiplier = parse_value<double>(key, value);
    } else if (key == "fpn_width") {
      cfg.fpn_width = parse_value<int>(key, value);
    } else if (key == "anchors_per_cell") {
      cfg.anchors_per_cell = parse_value<int>(key, value);
    } else if (key == "num_classes") {
      cfg.num_classes = parse_value<int>(key, value);
    } else if (key == "batch_norm") {
      cfg.batch_norm = parse_bool(key, value);
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

ArchConfig load_arch_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open architecture config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_arch_config(ss.str());
}

std::string format_arch_config(const ArchConfig& c) {
  std::ostringstream os;
  os << "input = " << c.input.h << ' ' << c.input.w << '\n'
     << "in_channels = " << c.in_channels << '\n'
     << "stem_channels = " << c.stem_channels << '\n'
     << "stem_stride = " << c.stem_stride << '\n'
     << "width_multiplier = " << c.width_multiplier << '\n'
     << "fpn_width = " << c.fpn_width << '\n'
     << "anchors_per_cell = " << c.anchors_per_cell << '\n'
     << "num_classes = " << c.num_classes << '\n'
     << "batch_norm = " << (c.batch_norm ? "true" : "false") << '\n'
     << "[backbone]\n"
     << "# out_channels stride repeat\n";
  for (const auto& s : c.backbone) os << s.out_channels << ' ' << s.stride << ' ' << s.repeat << '\n';
  return os.str();
}

namespace {

class GraphBuilderState {
 public:
  explicit GraphBuilderState(const ArchConfig& cfg) : cfg_(cfg) {}

  const std::string& add(std::string id, LayerSpec spec) {
    graph_.nodes.emplace_back(std::move(id), std::move(spec));
    return graph_.nodes.back().first;
  }

  std::string separable(std::string id, const std::string& input, int cin, int cout, int stride,
                        bool relu = true) {
    LayerSpec s;
    s.kind = LayerKind::SeparableConv2d;
    s.in_channels = cin;
    s.out_channels = cout;
    s.kernel = {3, 3};
    s.stride = {stride, stride};
    s.padding = {1, 1};
    s.batch_norm = cfg_.batch_norm;
    s.relu = relu;
    s.inputs = {input};
    return add(std::move(id), std::move(s));
  }

  std::string pointwise(std::string id, const std::string& input, int cin, int cout, bool bias,
                        bool bn, bool relu) {
    LayerSpec s;
    s.kind = LayerKind::PointwiseConv2d;
    s.in_channels = cin;
    s.out_channels = cout;
    s.has_bias = bias;
    s.batch_norm = bn;
    s.relu = relu;
    s.inputs = {input};
    return add(std::move(id), std::move(s));
  }

  ModelGraph& graph() { return graph_; }

 private:
  const ArchConfig& cfg_;
  ModelGraph graph_;
};

int scaled(int channels, double multiplier) {
  return std::max(1, static_cast<int>(std::lround(channels * multiplier)));
}

}  // namespace

ModelGraph build_tigernet(const ArchConfig& cfg) {
  if (cfg.fpn_width <= 0) throw ConfigError("fpn_width must be positive");
  if (cfg.anchors_per_cell <= 0) throw ConfigError("anchors_per_cell must be positive");
  if (cfg.num_classes <= 0) throw ConfigError("num_classes must be positive");
  if (cfg.in_channels <= 0 || cfg.stem_channels <= 0)
    throw ConfigError("channel counts must be positive");
  if (!(cfg.width_multiplier > 0)) throw ConfigError("width_multiplier must be positive");
  if (cfg.input.h <= 0 || cfg.input.w <= 0 || cfg.input.h % 32 != 0 || cfg.input.w % 32 != 0)
    throw ConfigError("input resolution must be a positive multiple of 32");
  if (cfg.stem_stride <= 0) throw ConfigError("stem_stride must be positive");
  for (const auto& st : cfg.backbone)
    if (st.out_channels <= 0 || st.stride <= 0 || st.repeat <= 0)
      throw ConfigError("backbone rows need positive channels, stride and repeat");

  GraphBuilderState b(cfg);
  b.graph().input_resolution = cfg.input;

  LayerSpec input;
  input.kind = LayerKind::Input;
  input.in_channels = input.out_channels = cfg.in_channels;
  std::string prev = b.add("input", input);

  LayerSpec stem;
  stem.kind = LayerKind::Conv2d;
  stem.in_channels = cfg.in_channels;
  stem.out_channels = scaled(cfg.stem_channels, cfg.width_multiplier);
  stem.kernel = {3, 3};
  stem.stride = {cfg.stem_stride, cfg.stem_stride};
  stem.padding = {1, 1};
  stem.batch_norm = cfg.batch_norm;
  stem.relu = true;
  stem.inputs = {prev};
  prev = b.add("stem", stem);
  int channels = stem.out_channels;
  int stride = cfg.stem_stride;

  // Last backbone node at each cumulative stride.
  std::map<int, std::pair<std::string, int>> taps;
  taps[stride] = {prev, channels};
  int block = 0;
  for (const auto& st : cfg.backbone) {
    for (int r = 0; r < st.repeat; ++r) {
      const int s = r == 0 ? st.stride : 1;
      const int cout = scaled(st.out_channels, cfg.width_multiplier);
      prev = b.separable("backbone.block" + std::to_string(block++), prev, channels, cout, s);
      channels = cout;
      stride *= s;
      if (stride > 32) throw ConfigError("backbone downsamples beyond stride 32");
      taps[stride] = {prev, channels};
    }
  }
  for (int need : {8, 16, 32})
    if (!taps.count(need))
      throw ConfigError("backbone never reaches cumulative stride " + std::to_string(need) +
                        "; cannot realize the 8/16/32/32/32/32 pyramid");
  if (stride != 32) throw ConfigError("backbone must end at cumulative stride 32");

  const int F = cfg.fpn_width;
  const auto lat3 = b.pointwise("fpn.lateral3", taps[8].first, taps[8].second, F, false,
                                cfg.batch_norm, false);
  const auto lat4 = b.pointwise("fpn.lateral4", taps[16].first, taps[16].second, F, false,
                                cfg.batch_norm, false);
  const auto lat5 = b.pointwise("fpn.lateral5", taps[32].first, taps[32].second, F, false,
                                cfg.batch_norm, false);

  auto upsample = [&](std::string id, const std::string& in) {
    LayerSpec s;
    s.kind = LayerKind::Upsample2x;
    s.in_channels = s.out_channels = F;
    s.inputs = {in};
    return b.add(std::move(id), s);
  };
  auto add = [&](std::string id, const std::string& a, const std::string& c) {
    LayerSpec s;
    s.kind = LayerKind::Add;
    s.in_channels = s.out_channels = F;
    s.inputs = {a, c};
    return b.add(std::move(id), s);
  };

  const auto up5 = upsample("fpn.up5", lat5);
  const auto merge4 = add("fpn.merge4", lat4, up5);
  const auto up4 = upsample("fpn.up4", merge4);
  const auto merge3 = add("fpn.merge3", lat3, up4);

  std::vector<std::string> levels;
  levels.push_back(b.separable("fpn.p3", merge3, F, F, 1));
  levels.push_back(b.separable("fpn.p4", merge4, F, F, 1));
  levels.push_back(b.separable("fpn.p5", lat5, F, F, 1));
  for (int l = 6; l <= 8; ++l)
    levels.push_back(b.separable("fpn.p" + std::to_string(l), levels.back(), F, F, 1));

  const int A = cfg.anchors_per_cell;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const std::string tag = "head" + std::to_string(i + 3);
    const auto cls_sub = b.separable(tag + ".cls_sub", levels[i], F, F, 1);
    const auto cls = b.pointwise(tag + ".cls", cls_sub, F, cfg.num_classes * A, true, false, false);
    const auto box_sub = b.separable(tag + ".box_sub", levels[i], F, F, 1);
    const auto box = b.pointwise(tag + ".box", box_sub, F, 4 * A, true, false, false);
    b.graph().heads.push_back({levels[i], cls, box});
    b.graph().outputs.push_back(cls);
    b.graph().outputs.push_back(box);
  }

  ModelGraph graph = std::move(b.graph());
  const auto strides = head_strides(graph);
  if (!std::equal(strides.begin(), strides.end(), kTigerNetStrides.begin(),
                  kTigerNetStrides.end()))
    throw ConfigError("built graph does not realize the 8/16/32/32/32/32 stride schedule");
  return graph;
}

SweepResult sweep_input_size(const GraphBuilder& builder, std::int64_t flops_target,
                             const std::vector<int>& candidate_sizes, const CostPolicy& policy) {
  if (candidate_sizes.empty()) throw Error("sweep_input_size: no candidate sizes");
  SweepResult result;
  std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
  for (int size : candidate_sizes) {
    const CostReport rep = count_cost(builder(size), policy);
    result.rows.push_back({size, rep.total_flops, rep.total_params});
    const std::int64_t gap = std::llabs(rep.total_flops - flops_target);
    if (gap < best_gap) {
      best_gap = gap;
      result.best_size = size;
    }
  }
  return result;
}

}  // namespace tigernet
