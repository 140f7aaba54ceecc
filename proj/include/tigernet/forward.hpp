#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/CXX11/Tensor>

#include "tigernet/model_graph.hpp"

namespace tigernet {

/// Channels-first activation tensor (C, H, W).
template <typename Scalar>
using Tensor3 = Eigen::Tensor<Scalar, 3, Eigen::RowMajor>;

/// Convolution kernel (out, in_per_group, kh, kw).
template <typename Scalar>
using Kernel4 = Eigen::Tensor<Scalar, 4, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct LayerWeights {
  Kernel4<Scalar> kernel;
  VectorX<Scalar> bias;      // empty unless the layer has a bias
  VectorX<Scalar> bn_scale;  // empty unless the layer has batch norm
  VectorX<Scalar> bn_shift;
};

/// Weights keyed by node id. A SeparableConv2d node `x` owns two entries,
/// `x.dw` and `x.pw`.
template <typename Scalar>
using WeightSet = std::map<std::string, LayerWeights<Scalar>>;

template <typename Scalar>
struct HeadOutput {
  Tensor3<Scalar> cls;  // (K*A, H, W)
  Tensor3<Scalar> box;  // (4*A, H, W)
};

inline Shape shape_of(const Eigen::DSizes<Eigen::Index, 3>& d) {
  return {int(d[0]), int(d[1]), int(d[2])};
}

/// Dense cross-correlation with zero padding.
template <typename Scalar>
Tensor3<Scalar> conv2d(const Tensor3<Scalar>& in, const Kernel4<Scalar>& k, Extent2 stride,
                       Extent2 pad) {
  const Eigen::Index cin = in.dimension(0), hin = in.dimension(1), win = in.dimension(2);
  const Eigen::Index cout = k.dimension(0), kh = k.dimension(2), kw = k.dimension(3);
  if (k.dimension(1) != cin) throw ShapeError("conv2d: kernel input channels do not match input");
  const int hout = conv_output_extent(int(hin), int(kh), stride.h, pad.h);
  const int wout = conv_output_extent(int(win), int(kw), stride.w, pad.w);
  Tensor3<Scalar> out(cout, hout, wout);
  out.setZero();
  for (Eigen::Index o = 0; o < cout; ++o)
    for (int y = 0; y < hout; ++y)
      for (int x = 0; x < wout; ++x) {
        Scalar acc(0);
        for (Eigen::Index c = 0; c < cin; ++c)
          for (Eigen::Index i = 0; i < kh; ++i) {
            const Eigen::Index iy = Eigen::Index(y) * stride.h + i - pad.h;
            if (iy < 0 || iy >= hin) continue;
            for (Eigen::Index j = 0; j < kw; ++j) {
              const Eigen::Index ix = Eigen::Index(x) * stride.w + j - pad.w;
              if (ix < 0 || ix >= win) continue;
              acc += k(o, c, i, j) * in(c, iy, ix);
            }
          }
        out(o, y, x) = acc;
      }
  return out;
}

/// One kh x kw filter per channel; kernel shape (C, 1, kh, kw).
template <typename Scalar>
Tensor3<Scalar> depthwise_conv2d(const Tensor3<Scalar>& in, const Kernel4<Scalar>& k,
                                 Extent2 stride, Extent2 pad) {
  const Eigen::Index ch = in.dimension(0), hin = in.dimension(1), win = in.dimension(2);
  const Eigen::Index kh = k.dimension(2), kw = k.dimension(3);
  if (k.dimension(0) != ch || k.dimension(1) != 1)
    throw ShapeError("depthwise_conv2d: kernel must be (C, 1, kh, kw)");
  const int hout = conv_output_extent(int(hin), int(kh), stride.h, pad.h);
  const int wout = conv_output_extent(int(win), int(kw), stride.w, pad.w);
  Tensor3<Scalar> out(ch, hout, wout);
  for (Eigen::Index c = 0; c < ch; ++c)
    for (int y = 0; y < hout; ++y)
      for (int x = 0; x < wout; ++x) {
        Scalar acc(0);
        for (Eigen::Index i = 0; i < kh; ++i) {
          const Eigen::Index iy = Eigen::Index(y) * stride.h + i - pad.h;
          if (iy < 0 || iy >= hin) continue;
          for (Eigen::Index j = 0; j < kw; ++j) {
            const Eigen::Index ix = Eigen::Index(x) * stride.w + j - pad.w;
            if (ix < 0 || ix >= win) continue;
            acc += k(c, 0, i, j) * in(c, iy, ix);
          }
        }
        out(c, y, x) = acc;
      }
  return out;
}

template <typename Scalar>
Tensor3<Scalar> upsample2x_nearest(const Tensor3<Scalar>& in) {
  Tensor3<Scalar> out(in.dimension(0), in.dimension(1) * 2, in.dimension(2) * 2);
  for (Eigen::Index c = 0; c < out.dimension(0); ++c)
    for (Eigen::Index y = 0; y < out.dimension(1); ++y)
      for (Eigen::Index x = 0; x < out.dimension(2); ++x) out(c, y, x) = in(c, y / 2, x / 2);
  return out;
}

/// Max pooling; padded cells never win.
template <typename Scalar>
Tensor3<Scalar> max_pool(const Tensor3<Scalar>& in, Extent2 kernel, Extent2 stride, Extent2 pad) {
  const Eigen::Index ch = in.dimension(0), hin = in.dimension(1), win = in.dimension(2);
  const int hout = conv_output_extent(int(hin), kernel.h, stride.h, pad.h);
  const int wout = conv_output_extent(int(win), kernel.w, stride.w, pad.w);
  Tensor3<Scalar> out(ch, hout, wout);
  for (Eigen::Index c = 0; c < ch; ++c)
    for (int y = 0; y < hout; ++y)
      for (int x = 0; x < wout; ++x) {
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (int i = 0; i < kernel.h; ++i)
          for (int j = 0; j < kernel.w; ++j) {
            const Eigen::Index iy = Eigen::Index(y) * stride.h + i - pad.h;
            const Eigen::Index ix = Eigen::Index(x) * stride.w + j - pad.w;
            if (iy < 0 || iy >= hin || ix < 0 || ix >= win) continue;
            best = std::max(best, in(c, iy, ix));
          }
        out(c, y, x) = best;
      }
  return out;
}

template <typename Scalar>
Tensor3<Scalar> global_avg_pool(const Tensor3<Scalar>& in) {
  Tensor3<Scalar> out(in.dimension(0), 1, 1);
  const Scalar n = Scalar(in.dimension(1) * in.dimension(2));
  for (Eigen::Index c = 0; c < in.dimension(0); ++c) {
    Scalar acc(0);
    for (Eigen::Index y = 0; y < in.dimension(1); ++y)
      for (Eigen::Index x = 0; x < in.dimension(2); ++x) acc += in(c, y, x);
    out(c, 0, 0) = acc / n;
  }
  return out;
}

namespace detail {

template <typename Scalar>
void check_vector(const std::string& id, const char* what, const VectorX<Scalar>& v, bool wanted,
                  int channels) {
  if (wanted && v.size() != channels)
    throw ShapeError("weights for '" + id + "': " + what + " must have " +
                     std::to_string(channels) + " entries, got " + std::to_string(v.size()));
  if (!wanted && v.size() != 0)
    throw ShapeError("weights for '" + id + "': unexpected " + what);
}

template <typename Scalar>
const LayerWeights<Scalar>& lookup(const WeightSet<Scalar>& weights, const std::string& id,
                                   const LayerSpec& spec) {
  const auto it = weights.find(id);
  if (it == weights.end()) throw ShapeError("missing weights for '" + id + "'");
  const auto& w = it->second;
  const bool dw = spec.kind == LayerKind::DepthwiseConv2d;
  const Eigen::Index want[4] = {spec.out_channels, dw ? 1 : spec.in_channels, spec.kernel.h,
                                spec.kernel.w};
  for (int d = 0; d < 4; ++d)
    if (w.kernel.dimension(d) != want[d])
      throw ShapeError("weights for '" + id + "': kernel dimension " + std::to_string(d) +
                       " is " + std::to_string(w.kernel.dimension(d)) + ", expected " +
                       std::to_string(want[d]));
  check_vector<Scalar>(id, "bias", w.bias, spec.has_bias, spec.out_channels);
  check_vector<Scalar>(id, "bn_scale", w.bn_scale, spec.batch_norm, spec.out_channels);
  check_vector<Scalar>(id, "bn_shift", w.bn_shift, spec.batch_norm, spec.out_channels);
  return w;
}

template <typename Scalar>
void finish(Tensor3<Scalar>& t, const LayerSpec& spec, const LayerWeights<Scalar>& w) {
  for (Eigen::Index c = 0; c < t.dimension(0); ++c) {
    const Scalar b = spec.has_bias ? w.bias[c] : Scalar(0);
    const Scalar s = spec.batch_norm ? w.bn_scale[c] : Scalar(1);
    const Scalar h = spec.batch_norm ? w.bn_shift[c] : Scalar(0);
    for (Eigen::Index y = 0; y < t.dimension(1); ++y)
      for (Eigen::Index x = 0; x < t.dimension(2); ++x) {
        Scalar v = (t(c, y, x) + b) * s + h;
        if (spec.relu && v < Scalar(0)) v = Scalar(0);
        t(c, y, x) = v;
      }
  }
}

template <typename Scalar>
Tensor3<Scalar> run_conv(const Tensor3<Scalar>& in, const std::string& id, const LayerSpec& spec,
                         const WeightSet<Scalar>& weights) {
  const auto& w = lookup(weights, id, spec);
  Tensor3<Scalar> out = spec.kind == LayerKind::DepthwiseConv2d
                            ? depthwise_conv2d(in, w.kernel, spec.stride, spec.padding)
                            : conv2d(in, w.kernel, spec.stride, spec.padding);
  finish(out, spec, w);
  return out;
}

}  // namespace detail

/// Names of the primitive (non-separable) convolution layers, paired with
/// their specs, in execution order. Separable nodes contribute `.dw`/`.pw`.
inline std::vector<std::pair<std::string, LayerSpec>> weighted_layers(const ModelGraph& graph) {
  std::vector<std::pair<std::string, LayerSpec>> out;
  for (const auto& [id, spec] : graph.nodes) {
    switch (spec.kind) {
      case LayerKind::Conv2d:
      case LayerKind::DepthwiseConv2d:
      case LayerKind::PointwiseConv2d: out.emplace_back(id, spec); break;
      case LayerKind::SeparableConv2d: {
        auto parts = expand_separable(spec);
        out.emplace_back(id + ".dw", parts.depthwise);
        out.emplace_back(id + ".pw", parts.pointwise);
        break;
      }
      default: break;
    }
  }
  return out;
}

/// Weights drawn uniformly from [-scale, scale] (bn scale from [0.5, 1.5]).
template <typename Scalar>
WeightSet<Scalar> random_weights(const ModelGraph& graph, std::uint64_t seed,
                                 Scalar scale = Scalar(0.1)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  WeightSet<Scalar> ws;
  for (const auto& [id, spec] : weighted_layers(graph)) {
    LayerWeights<Scalar> w;
    const bool dw = spec.kind == LayerKind::DepthwiseConv2d;
    w.kernel.resize(spec.out_channels, dw ? 1 : spec.in_channels, spec.kernel.h, spec.kernel.w);
    for (Eigen::Index i = 0; i < w.kernel.size(); ++i) w.kernel.data()[i] = Scalar(u(rng)) * scale;
    if (spec.has_bias) {
      w.bias.resize(spec.out_channels);
      for (auto& v : w.bias) v = Scalar(u(rng)) * scale;
    }
    if (spec.batch_norm) {
      w.bn_scale.resize(spec.out_channels);
      w.bn_shift.resize(spec.out_channels);
      for (auto& v : w.bn_scale) v = Scalar(1) + Scalar(0.5 * u(rng));
      for (auto& v : w.bn_shift) v = Scalar(u(rng)) * scale;
    }
    ws.emplace(id, std::move(w));
  }
  return ws;
}

template <typename Scalar>
WeightSet<Scalar> zero_weights(const ModelGraph& graph) {
  WeightSet<Scalar> ws = random_weights<Scalar>(graph, 0);
  for (auto& [id, w] : ws) {
    w.kernel.setZero();
    w.bias.setZero();
    w.bn_scale.setZero();
    w.bn_shift.setZero();
  }
  return ws;
}

/// Plain direct evaluation of every node; returns one tensor per node in
/// graph order.
template <typename Scalar>
std::vector<Tensor3<Scalar>> forward_all(const ModelGraph& graph, const WeightSet<Scalar>& weights,
                                         const Tensor3<Scalar>& image) {
  validate(graph);
  std::vector<Tensor3<Scalar>> values;
  values.reserve(graph.nodes.size());
  std::map<std::string, std::size_t> index;
  for (const auto& [id, spec] : graph.nodes) {
    auto in = [&](std::size_t k) -> const Tensor3<Scalar>& {
      return values[index.at(spec.inputs[k])];
    };
    Tensor3<Scalar> out;
    switch (spec.kind) {
      case LayerKind::Input: {
        const Shape want{spec.out_channels, graph.input_resolution.h, graph.input_resolution.w};
        if (!(shape_of(image.dimensions()) == want))
          throw ShapeError("forward: image does not match the graph input resolution");
        out = image;
        break;
      }
      case LayerKind::Conv2d:
      case LayerKind::DepthwiseConv2d:
      case LayerKind::PointwiseConv2d:
        if (in(0).dimension(0) != spec.in_channels)
          throw ShapeError("forward: channel mismatch entering '" + id + "'");
        out = detail::run_conv(in(0), id, spec, weights);
        break;
      case LayerKind::SeparableConv2d: {
        if (in(0).dimension(0) != spec.in_channels)
          throw ShapeError("forward: channel mismatch entering '" + id + "'");
        const auto parts = expand_separable(spec);
        const Tensor3<Scalar> mid = detail::run_conv(in(0), id + ".dw", parts.depthwise, weights);
        out = detail::run_conv(mid, id + ".pw", parts.pointwise, weights);
        break;
      }
      case LayerKind::Upsample2x: out = upsample2x_nearest(in(0)); break;
      case LayerKind::Add: {
        out = in(0);
        for (std::size_t k = 1; k < spec.inputs.size(); ++k) {
          if (!(shape_of(in(k).dimensions()) == shape_of(out.dimensions())))
            throw ShapeError("forward: Add node '" + id + "' inputs '" + spec.inputs[0] +
                             "' and '" + spec.inputs[k] + "' differ in shape");
          out += in(k);
        }
        break;
      }
      case LayerKind::MaxPool:
        out = max_pool(in(0), spec.kernel, spec.stride, spec.padding);
        break;
      case LayerKind::GlobalPool: out = global_avg_pool(in(0)); break;
    }
    index[id] = values.size();
    values.push_back(std::move(out));
  }
  return values;
}

/// Tensors of the graph's designated outputs, in `graph.outputs` order.
template <typename Scalar>
std::vector<Tensor3<Scalar>> forward(const ModelGraph& graph, const WeightSet<Scalar>& weights,
                                     const Tensor3<Scalar>& image) {
  auto all = forward_all(graph, weights, image);
  std::vector<Tensor3<Scalar>> outs;
  for (const auto& id : graph.outputs) outs.push_back(all[*graph.index_of(id)]);
  return outs;
}

/// Per-level (class logits, box offsets) for graphs with pyramid heads.
template <typename Scalar>
std::vector<HeadOutput<Scalar>> forward_heads(const ModelGraph& graph,
                                              const WeightSet<Scalar>& weights,
                                              const Tensor3<Scalar>& image) {
  auto all = forward_all(graph, weights, image);
  std::vector<HeadOutput<Scalar>> heads;
  for (const auto& h : graph.heads)
    heads.push_back({all[*graph.index_of(h.cls)], all[*graph.index_of(h.box)]});
  return heads;
}

}  // namespace tigernet
