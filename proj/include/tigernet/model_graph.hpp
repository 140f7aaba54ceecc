#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tigernet/error.hpp"

namespace tigernet {

enum class LayerKind {
  Input,
  Conv2d,
  DepthwiseConv2d,
  PointwiseConv2d,
  SeparableConv2d,
  Upsample2x,
  Add,
  MaxPool,
  GlobalPool,
};

const char* to_string(LayerKind kind);

struct Extent2 {
  int h = 0;
  int w = 0;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

/// Output shape of a node, channels-first.
struct Shape {
  int c = 0;
  int h = 0;
  int w = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::ostream& operator<<(std::ostream& os, const Shape& s);

struct LayerSpec {
  LayerKind kind = LayerKind::Input;
  int in_channels = 0;
  int out_channels = 0;
  Extent2 kernel{1, 1};
  Extent2 stride{1, 1};
  Extent2 padding{0, 0};
  bool has_bias = false;
  // Inference-time affine (scale, shift) per output channel; counted as
  // two parameters per channel when enabled.
  bool batch_norm = false;
  bool relu = false;
  std::vector<std::string> inputs;
};

/// For accounting and execution a SeparableConv2d is exactly a depthwise
/// kxk convolution (carrying stride and padding) followed by a 1x1
/// pointwise convolution. Bias, batch-norm and activation flags apply to
/// both halves.
struct SeparableParts {
  LayerSpec depthwise;
  LayerSpec pointwise;
};
SeparableParts expand_separable(const LayerSpec& sep);

/// One pyramid level: the feature node and its two prediction heads.
struct PyramidHead {
  std::string feature;
  std::string cls;
  std::string box;
};

struct ModelGraph {
  std::vector<std::pair<std::string, LayerSpec>> nodes;
  std::vector<std::string> outputs;
  std::vector<PyramidHead> heads;
  Extent2 input_resolution;

  const LayerSpec& node(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;
};

/// Structural checks: unique ids, a single Input node first, inputs
/// precede their consumers, channel bookkeeping per kind, outputs exist.
void validate(const ModelGraph& graph);

/// Convolution/pool spatial rule: floor((in + 2p - k) / s) + 1.
int conv_output_extent(int in, int kernel, int stride, int padding);

/// Per-node output shapes in node order. Throws ShapeError naming the
/// offending node(s) on any mismatch.
std::vector<Shape> infer_shapes(const ModelGraph& graph);

/// Downsampling factor of each pyramid head relative to the input.
std::vector<int> head_strides(const ModelGraph& graph);

struct CostPolicy {
  int flops_per_mac = 2;
  bool count_bias_adds = true;
  bool count_batch_norm_params = true;
};

struct NodeCost {
  std::string node_id;
  LayerKind kind = LayerKind::Input;
  std::int64_t params = 0;
  std::int64_t flops = 0;
  Shape output;
};

struct CostReport {
  std::int64_t total_params = 0;
  std::int64_t total_flops = 0;
  CostPolicy policy;
  std::vector<NodeCost> per_node;

  std::string convention() const;
};

/// Parameters: Conv2d k*k*Cin*Cout, depthwise k*k*C, pointwise Cin*Cout,
/// plus Cout for bias and 2*Cout for batch norm (when the policy counts it).
/// FLOPs of a convolution: flops_per_mac * weights * H_out * W_out, plus
/// H_out*W_out*Cout bias adds. Element-wise nodes are charged per output
/// element: Add (inputs-1), MaxPool (k*k-1 comparisons), GlobalPool
/// (H_in*W_in accumulations per channel), Upsample2x (nearest copy) 0.
/// Normalization and activations are not charged.
CostReport count_cost(const ModelGraph& graph, const CostPolicy& policy = {});

std::int64_t layer_params(const LayerSpec& spec, const CostPolicy& policy = {});
std::int64_t layer_flops(const LayerSpec& spec, const std::vector<Shape>& input_shapes,
                         const Shape& output, const CostPolicy& policy = {});

void write_cost_csv(std::ostream& os, const CostReport& report);
void write_cost_table(std::ostream& os, const CostReport& report);

/// One row of the backbone table: a depthwise-separable block repeated
/// `repeat` times, the first repetition carrying `stride`.
struct BackboneStage {
  int out_channels = 0;
  int stride = 1;
  int repeat = 1;
};

struct ArchConfig {
  Extent2 input{256, 256};
  int in_channels = 3;
  // Stem: plain 3x3 convolution.
  int stem_channels = 32;
  int stem_stride = 2;
  // FD-MobileNet layer table at width 1.0; channels are scaled by the
  // multiplier when the graph is built.
  std::vector<BackboneStage> backbone = {
      {64, 2, 1}, {128, 2, 1}, {128, 1, 1}, {256, 2, 1}, {256, 1, 1},
      {512, 2, 1}, {512, 1, 4}, {1024, 1, 1},
  };
  double width_multiplier = 0.5;
  int fpn_width = 64;
  int anchors_per_cell = 6;
  int num_classes = 2;  // including background
  bool batch_norm = true;
};

ArchConfig default_arch_config();

/// Parse the text config format: `key = value` lines plus a `[backbone]`
/// section of `out_channels stride repeat` rows. `#` starts a comment.
ArchConfig parse_arch_config(const std::string& text);
ArchConfig load_arch_config(const std::string& path);
std::string format_arch_config(const ArchConfig& config);

/// Backbone, FPN (1x1 laterals, nearest 2x top-down, separable 3x3
/// smoothing), three extra stride-1 separable levels on top of P5 so the
/// last four maps all stay at stride 32, and per-level
/// non-shared class and box subnets (one separable 3x3 layer followed by
/// a 1x1 prediction emitting K*A or 4*A channels).
ModelGraph build_tigernet(const ArchConfig& config = default_arch_config());

inline constexpr std::array<int, 6> kTigerNetStrides{8, 16, 32, 32, 32, 32};

struct SweepRow {
  int size = 0;
  std::int64_t flops = 0;
  std::int64_t params = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int best_size = 0;
};

using GraphBuilder = std::function<ModelGraph(int size)>;

/// Evaluate the builder at every candidate square size and pick the one
/// whose FLOPs are closest to the target (ties: first candidate).
SweepResult sweep_input_size(const GraphBuilder& builder, std::int64_t flops_target,
                             const std::vector<int>& candidate_sizes,
                             const CostPolicy& policy = {});

}  // namespace tigernet
