#include "lsbound/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lsbound/errors.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool2d: return "maxpool2d";
    case LayerKind::Flatten: return "flatten";
  }
  return "?";
}

const char* to_string(LossKind kind) {
  return kind == LossKind::Nll ? "nll" : "multiclass_hinge";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "nll") return LossKind::Nll;
  if (name == "multiclass_hinge" || name == "hinge") return LossKind::MulticlassHinge;
  throw invalid_input_error("unknown loss kind: " + name);
}

LayerSpec LayerSpec::dense(int in, int out) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in_width = in;
  s.out_width = out;
  return s;
}

LayerSpec LayerSpec::conv2d(int in_channels, int out_channels, int kernel) {
  LayerSpec s;
  s.kind = LayerKind::Conv2d;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel = kernel;
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::Relu;
  return s;
}

LayerSpec LayerSpec::maxpool2d() {
  LayerSpec s;
  s.kind = LayerKind::MaxPool2d;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::Dense:
      return static_cast<std::size_t>(in_width) * static_cast<std::size_t>(out_width);
    case LayerKind::Conv2d:
      return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
    default:
      return 0;
  }
}

TensorShape TensorShape::vec(int width) {
  TensorShape s;
  s.width = width;
  s.spatial = false;
  return s;
}

TensorShape TensorShape::chw(int c, int h, int w) {
  TensorShape s;
  s.c = c;
  s.h = h;
  s.w = w;
  s.spatial = true;
  return s;
}

std::size_t TensorShape::size() const {
  return spatial ? static_cast<std::size_t>(c) * h * w : static_cast<std::size_t>(width);
}

namespace {

TensorShape apply_layer_shape(const LayerSpec& layer, const TensorShape& in) {
  switch (layer.kind) {
    case LayerKind::Dense: {
      if (in.spatial)
        throw invalid_input_error("dense layer applied to spatial input; add flatten first");
      if (in.width != layer.in_width)
        throw invalid_input_error("dense layer in_width " + std::to_string(layer.in_width) +
                                  " does not match incoming width " + std::to_string(in.width));
      if (layer.out_width < 1) throw invalid_input_error("dense layer out_width must be >= 1");
      return TensorShape::vec(layer.out_width);
    }
    case LayerKind::Conv2d: {
      if (!in.spatial) throw invalid_input_error("conv2d requires a spatial input shape");
      if (in.c != layer.in_channels)
        throw invalid_input_error("conv2d in_channels mismatch");
      if (layer.kernel < 1 || layer.out_channels < 1)
        throw invalid_input_error("conv2d kernel and out_channels must be >= 1");
      const int oh = in.h - layer.kernel + 1;
      const int ow = in.w - layer.kernel + 1;
      if (oh < 1 || ow < 1) throw invalid_input_error("conv2d kernel larger than input");
      return TensorShape::chw(layer.out_channels, oh, ow);
    }
    case LayerKind::Relu:
      return in;
    case LayerKind::MaxPool2d: {
      if (!in.spatial) throw invalid_input_error("maxpool2d requires a spatial input shape");
      const int oh = in.h / 2;
      const int ow = in.w / 2;
      if (oh < 1 || ow < 1) throw invalid_input_error("maxpool2d input smaller than 2x2");
      return TensorShape::chw(in.c, oh, ow);
    }
    case LayerKind::Flatten: {
      if (!in.spatial) throw invalid_input_error("flatten requires a spatial input shape");
      return TensorShape::vec(static_cast<int>(in.size()));
    }
  }
  throw invalid_input_error("unknown layer kind");
}

}  // namespace

Network::Network(std::vector<LayerSpec> layers, TensorShape input_shape, std::size_t class_count)
    : layers_(std::move(layers)), input_shape_(input_shape), class_count_(class_count) {
  if (layers_.empty()) throw invalid_input_error("Network: needs at least one layer");
  if (class_count_ < 1) throw invalid_input_error("Network: class_count must be >= 1");
  if (input_shape_.size() < 1) throw invalid_input_error("Network: empty input shape");
  shapes_.reserve(layers_.size());
  offsets_.reserve(layers_.size());
  TensorShape cur = input_shape_;
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    offsets_.push_back(total);
    total += layer.weight_count();
    cur = apply_layer_shape(layer, cur);
    shapes_.push_back(cur);
  }
  if (cur.spatial || cur.width != static_cast<int>(class_count_))
    throw invalid_input_error("Network: final output width must equal class_count");
  weights_.assign(total, 0.0);
}

void Network::set_weights(std::span<const double> w) {
  if (w.size() != weights_.size())
    throw invalid_input_error("set_weights: expected " + std::to_string(weights_.size()) +
                              " weights, got " + std::to_string(w.size()));
  for (double v : w)
    if (!std::isfinite(v)) throw invalid_input_error("set_weights: non-finite weight");
  std::copy(w.begin(), w.end(), weights_.begin());
}

std::string Network::describe() const {
  std::ostringstream os;
  if (input_shape_.spatial)
    os << input_shape_.c << "x" << input_shape_.h << "x" << input_shape_.w;
  else
    os << input_shape_.width;
  for (const auto& layer : layers_) {
    os << " -> " << to_string(layer.kind);
    if (layer.kind == LayerKind::Dense) os << "(" << layer.out_width << ")";
    if (layer.kind == LayerKind::Conv2d)
      os << "(" << layer.out_channels << "c" << layer.kernel << "k)";
  }
  os << " [" << weights_.size() << " params]";
  return os.str();
}

namespace {

void dense_forward(std::span<const double> w, int in, int out, std::span<const double> x,
                   std::vector<double>& y) {
  y.assign(static_cast<std::size_t>(out), 0.0);
  for (int o = 0; o < out; ++o) {
    const double* row = w.data() + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(o)] = acc;
  }
}

void conv_forward(std::span<const double> w, const LayerSpec& spec, const TensorShape& in_shape,
                  const TensorShape& out_shape, std::span<const double> x, std::vector<double>& y) {
  const int K = spec.kernel;
  y.assign(out_shape.size(), 0.0);
  for (int oc = 0; oc < out_shape.c; ++oc)
    for (int i = 0; i < out_shape.h; ++i)
      for (int j = 0; j < out_shape.w; ++j) {
        double acc = 0.0;
        for (int ic = 0; ic < in_shape.c; ++ic)
          for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b) {
              const std::size_t wi =
                  ((static_cast<std::size_t>(oc) * in_shape.c + ic) * K + a) * K + b;
              const std::size_t xi =
                  (static_cast<std::size_t>(ic) * in_shape.h + (i + a)) * in_shape.w + (j + b);
              acc += w[wi] * x[xi];
            }
        y[(static_cast<std::size_t>(oc) * out_shape.h + i) * out_shape.w + j] = acc;
      }
}

void maxpool_forward(const TensorShape& in_shape, const TensorShape& out_shape,
                     std::span<const double> x, std::vector<double>& y, std::vector<int>& argmax) {
  y.assign(out_shape.size(), 0.0);
  argmax.assign(out_shape.size(), 0);
  for (int c = 0; c < out_shape.c; ++c)
    for (int i = 0; i < out_shape.h; ++i)
      for (int j = 0; j < out_shape.w; ++j) {
        int best_idx = -1;
        double best = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const int ii = 2 * i + a;
            const int jj = 2 * j + b;
            const int xi = (c * in_shape.h + ii) * in_shape.w + jj;
            const double v = x[static_cast<std::size_t>(xi)];
            if (best_idx < 0 || v > best) {  // ties keep the earliest position
              best = v;
              best_idx = xi;
            }
          }
        const std::size_t oi = (static_cast<std::size_t>(c) * out_shape.h + i) * out_shape.w + j;
        y[oi] = best;
        argmax[oi] = best_idx;
      }
}

}  // namespace

namespace {

void forward_into(const Network& net, std::span<const double> x, Workspace& ws) {
  if (x.size() != net.input_dim())
    throw invalid_input_error("forward: input has " + std::to_string(x.size()) +
                              " entries, expected " + std::to_string(net.input_dim()));
  const auto& layers = net.layers();
  ws.acts.resize(layers.size() + 1);
  ws.pool_idx.resize(layers.size());
  ws.acts[0].assign(x.begin(), x.end());
  TensorShape cur = net.input_shape();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerSpec& layer = layers[li];
    const TensorShape out_shape = net.shape_after(li);
    const std::span<const double> w =
        net.weights().subspan(net.layer_offset(li), layer.weight_count());
    const auto& in = ws.acts[li];
    auto& out = ws.acts[li + 1];
    switch (layer.kind) {
      case LayerKind::Dense:
        dense_forward(w, layer.in_width, layer.out_width, in, out);
        break;
      case LayerKind::Conv2d:
        conv_forward(w, layer, cur, out_shape, in, out);
        break;
      case LayerKind::Relu:
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
        break;
      case LayerKind::MaxPool2d:
        maxpool_forward(cur, out_shape, in, out, ws.pool_idx[li]);
        break;
      case LayerKind::Flatten:
        out.assign(in.begin(), in.end());
        break;
    }
    cur = out_shape;
  }
  for (double v : ws.acts.back())
    if (!std::isfinite(v)) throw evaluation_error("forward: non-finite logits");
}

}  // namespace

std::vector<double> forward(const Network& net, std::span<const double> x) {
  Workspace ws;
  forward_into(net, x, ws);
  return ws.acts.back();
}

double loss_from_logits(std::span<const double> logits, std::size_t y, LossKind kind) {
  const std::size_t k = logits.size();
  if (y >= k) throw invalid_input_error("loss: label out of range");
  for (double z : logits)
    if (!std::isfinite(z)) throw evaluation_error("loss: non-finite logits");
  if (kind == LossKind::Nll) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double value = zmax + std::log(sum) - logits[y];
    return value < 0.0 ? 0.0 : value;  // guards rounding at the k=1 degenerate case
  }
  double best = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double margin = logits[j] - logits[y] + (j == y ? 0.0 : 1.0);
    if (margin > best) best = margin;
  }
  return best;
}

std::vector<double> dloss_dlogits(std::span<const double> logits, std::size_t y, LossKind kind) {
  const std::size_t k = logits.size();
  if (y >= k) throw invalid_input_error("loss gradient: label out of range");
  std::vector<double> d(k, 0.0);
  if (kind == LossKind::Nll) {
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    for (std::size_t j = 0; j < k; ++j) d[j] = std::exp(logits[j] - zmax) / sum;
    d[y] -= 1.0;
    return d;
  }
  // Hinge: argmax margin, ties toward the smallest class index.
  std::size_t best = y;
  double best_margin = 0.0;  // the j == y term
  for (std::size_t j = 0; j < k; ++j) {
    const double margin = logits[j] - logits[y] + (j == y ? 0.0 : 1.0);
    if (margin > best_margin || (margin == best_margin && j < best)) {
      best_margin = margin;
      best = j;
    }
  }
  if (best != y) {
    d[best] += 1.0;
    d[y] -= 1.0;
  }
  return d;
}

double loss(const Network& net, std::span<const double> x, std::size_t y, LossKind kind) {
  const std::vector<double> z = forward(net, x);
  return loss_from_logits(z, y, kind);
}

double loss(const Network& net, std::span<const double> x, std::size_t y, LossKind kind,
            Workspace& ws) {
  forward_into(net, x, ws);
  return loss_from_logits(ws.acts.back(), y, kind);
}

double backprop(const Network& net, std::span<const double> x, std::size_t y, LossKind kind,
                Workspace& ws, std::vector<double>* input_grad, std::vector<double>* weight_grad) {
  forward_into(net, x, ws);
  const double value = loss_from_logits(ws.acts.back(), y, kind);
  const auto& layers = net.layers();
  ws.grads.resize(layers.size() + 1);
  ws.grads[layers.size()] = dloss_dlogits(ws.acts.back(), y, kind);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const LayerSpec& layer = layers[li];
    const TensorShape in_shape = li == 0 ? net.input_shape() : net.shape_after(li - 1);
    const TensorShape out_shape = net.shape_after(li);
    const auto& delta = ws.grads[li + 1];
    auto& dx = ws.grads[li];
    const auto& in = ws.acts[li];
    switch (layer.kind) {
      case LayerKind::Dense: {
        const std::span<const double> w =
            net.weights().subspan(net.layer_offset(li), layer.weight_count());
        dx.assign(in.size(), 0.0);
        for (int o = 0; o < layer.out_width; ++o) {
          const double dz = delta[static_cast<std::size_t>(o)];
          const double* row = w.data() + static_cast<std::size_t>(o) * layer.in_width;
          for (int i = 0; i < layer.in_width; ++i) dx[static_cast<std::size_t>(i)] += dz * row[i];
        }
        if (weight_grad) {
          double* gw = weight_grad->data() + net.layer_offset(li);
          for (int o = 0; o < layer.out_width; ++o) {
            const double dz = delta[static_cast<std::size_t>(o)];
            double* grow = gw + static_cast<std::size_t>(o) * layer.in_width;
            for (int i = 0; i < layer.in_width; ++i) grow[i] += dz * in[static_cast<std::size_t>(i)];
          }
        }
        break;
      }
      case LayerKind::Conv2d: {
        const std::span<const double> w =
            net.weights().subspan(net.layer_offset(li), layer.weight_count());
        const int K = layer.kernel;
        dx.assign(in.size(), 0.0);
        double* gw = weight_grad ? weight_grad->data() + net.layer_offset(li) : nullptr;
        for (int oc = 0; oc < out_shape.c; ++oc)
          for (int i = 0; i < out_shape.h; ++i)
            for (int j = 0; j < out_shape.w; ++j) {
              const double dz =
                  delta[(static_cast<std::size_t>(oc) * out_shape.h + i) * out_shape.w + j];
              if (dz == 0.0) continue;
              for (int ic = 0; ic < in_shape.c; ++ic)
                for (int a = 0; a < K; ++a)
                  for (int b = 0; b < K; ++b) {
                    const std::size_t wi =
                        ((static_cast<std::size_t>(oc) * in_shape.c + ic) * K + a) * K + b;
                    const std::size_t xi = (static_cast<std::size_t>(ic) * in_shape.h + (i + a)) *
                                               in_shape.w +
                                           (j + b);
                    dx[xi] += dz * w[wi];
                    if (gw) gw[wi] += dz * in[xi];
                  }
            }
        break;
      }
      case LayerKind::Relu: {
        dx.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) dx[i] = in[i] > 0.0 ? delta[i] : 0.0;
        break;
      }
      case LayerKind::MaxPool2d: {
        dx.assign(in.size(), 0.0);
        const auto& idx = ws.pool_idx[li];
        for (std::size_t o = 0; o < delta.size(); ++o)
          dx[static_cast<std::size_t>(idx[o])] += delta[o];
        break;
      }
      case LayerKind::Flatten: {
        dx.assign(delta.begin(), delta.end());
        break;
      }
    }
  }
  if (input_grad) *input_grad = ws.grads[0];
  return value;
}

std::vector<double> input_gradient(const Network& net, std::span<const double> x, std::size_t y,
                                   LossKind kind) {
  Workspace ws;
  std::vector<double> grad;
  backprop(net, x, y, kind, ws, &grad, nullptr);
  return grad;
}

std::vector<double> weight_gradient(const Network& net, std::span<const Sample> batch,
                                    LossKind kind) {
  if (batch.empty()) throw invalid_input_error("weight_gradient: empty batch");
  Workspace ws;
  std::vector<double> grad(net.weight_count(), 0.0);
  for (const Sample& s : batch) backprop(net, s.x, s.y, kind, ws, nullptr, &grad);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv;
  return grad;
}

double lipschitz_bound_hat_loss(LossKind kind, std::size_t k) {
  if (k < 1) throw invalid_input_error("lipschitz_bound_hat_loss: k must be >= 1");
  switch (kind) {
    case LossKind::Nll:
    case LossKind::MulticlassHinge:
      // NLL: ||softmax - e_y|| <= sqrt(2); hinge subgradient has at most one
      // +1 and one -1 entry.
      return std::sqrt(2.0);
  }
  throw invalid_input_error("lipschitz_bound_hat_loss: unsupported loss kind");
}

Network make_linear(std::size_t d, std::size_t k) {
  return Network({LayerSpec::dense(static_cast<int>(d), static_cast<int>(k))},
                 TensorShape::vec(static_cast<int>(d)), k);
}

Network make_mlp(std::size_t d, std::size_t k, int depth, std::size_t param_budget) {
  if (depth < 1) throw invalid_input_error("make_mlp: depth must be >= 1");
  if (depth == 1) return make_linear(d, k);
  const double budget =
      static_cast<double>(param_budget == 0 ? d * k : param_budget);
  const double dk = static_cast<double>(d + k);
  double width;
  if (depth == 2) {
    width = budget / dk;
  } else {
    const double inner = static_cast<double>(depth - 2);
    width = (-dk + std::sqrt(dk * dk + 4.0 * inner * budget)) / (2.0 * inner);
  }
  const int w = std::max(2, static_cast<int>(std::lround(width)));
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::dense(static_cast<int>(d), w));
  for (int i = 0; i < depth - 2; ++i) {
    layers.push_back(LayerSpec::relu());
    layers.push_back(LayerSpec::dense(w, w));
  }
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::dense(w, static_cast<int>(k)));
  return Network(std::move(layers), TensorShape::vec(static_cast<int>(d)), k);
}

Network make_cnn(TensorShape input, std::size_t k, int conv_layers, int channels, int kernel,
                 std::size_t fc_width) {
  if (!input.spatial) throw invalid_input_error("make_cnn: input shape must be spatial");
  if (conv_layers < 1) throw invalid_input_error("make_cnn: conv_layers must be >= 1");
  std::vector<LayerSpec> layers;
  TensorShape cur = input;
  int in_c = input.c;
  for (int i = 0; i < conv_layers; ++i) {
    layers.push_back(LayerSpec::conv2d(in_c, channels, kernel));
    cur = apply_layer_shape(layers.back(), cur);
    layers.push_back(LayerSpec::relu());
    layers.push_back(LayerSpec::maxpool2d());
    cur = apply_layer_shape(layers.back(), cur);
    in_c = channels;
  }
  layers.push_back(LayerSpec::flatten());
  const int flat = static_cast<int>(cur.size());
  layers.push_back(LayerSpec::dense(flat, static_cast<int>(fc_width)));
  layers.push_back(LayerSpec::relu());
  layers.push_back(LayerSpec::dense(static_cast<int>(fc_width), static_cast<int>(k)));
  return Network(std::move(layers), input, k);
}

void init_uniform_fanin(Network& net, std::uint64_t seed) {
  RandomStream stream(seed, "init_uniform");
  auto w = net.weights();
  std::size_t index = 0;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const LayerSpec& layer = net.layers()[li];
    const std::size_t count = layer.weight_count();
    if (count == 0) continue;
    const int fan_in = layer.kind == LayerKind::Dense
                           ? layer.in_width
                           : layer.in_channels * layer.kernel * layer.kernel;
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i, ++index)
      w[net.layer_offset(li) + i] = scale * (2.0 * stream.uniform01(index) - 1.0);
  }
}

void init_gaussian(Network& net, double sigma2, std::uint64_t seed) {
  if (!(sigma2 >= 0.0)) throw invalid_input_error("init_gaussian: sigma2 must be >= 0");
  RandomStream stream(seed, "init_gaussian");
  const double sd = std::sqrt(sigma2);
  auto w = net.weights();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = sd * stream.normal(i);
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw format_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

double get_f64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw format_error("checkpoint: truncated file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return std::bit_cast<double>(bits);
}

constexpr char kCheckpointMagic[4] = {'L', 'S', 'B', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
  nlohmann::json header;
  header["class_count"] = net.class_count();
  header["weight_count"] = net.weight_count();
  const TensorShape& in = net.input_shape();
  header["input_shape"] = {{"spatial", in.spatial}, {"c", in.c}, {"h", in.h},
                           {"w", in.w},            {"width", in.width}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    nlohmann::json j;
    j["kind"] = to_string(layer.kind);
    if (layer.kind == LayerKind::Dense) {
      j["in"] = layer.in_width;
      j["out"] = layer.out_width;
    } else if (layer.kind == LayerKind::Conv2d) {
      j["in_channels"] = layer.in_channels;
      j["out_channels"] = layer.out_channels;
      j["kernel"] = layer.kernel;
    }
    layers.push_back(j);
  }
  header["layers"] = layers;
  const std::string header_text = header.dump();

  std::string blob;
  blob.append(kCheckpointMagic, 4);
  put_u32(blob, kCheckpointVersion);
  put_u32(blob, static_cast<std::uint32_t>(header_text.size()));
  blob += header_text;
  for (double v : net.weights()) put_f64(blob, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("checkpoint: cannot open " + path + " for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw format_error("checkpoint: write failed for " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("checkpoint: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string blob = buf.str();
  if (blob.size() < 12 || std::memcmp(blob.data(), kCheckpointMagic, 4) != 0)
    throw format_error("checkpoint: bad magic in " + path);
  std::size_t pos = 4;
  const std::uint32_t version = get_u32(blob, pos);
  if (version != kCheckpointVersion)
    throw format_error("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t header_len = get_u32(blob, pos);
  if (pos + header_len > blob.size()) throw format_error("checkpoint: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("checkpoint: bad header: ") + e.what());
  }
  pos += header_len;

  std::vector<LayerSpec> layers;
  for (const auto& j : header.at("layers")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dense")
      layers.push_back(LayerSpec::dense(j.at("in").get<int>(), j.at("out").get<int>()));
    else if (kind == "conv2d")
      layers.push_back(LayerSpec::conv2d(j.at("in_channels").get<int>(),
                                         j.at("out_channels").get<int>(),
                                         j.at("kernel").get<int>()));
    else if (kind == "relu")
      layers.push_back(LayerSpec::relu());
    else if (kind == "maxpool2d")
      layers.push_back(LayerSpec::maxpool2d());
    else if (kind == "flatten")
      layers.push_back(LayerSpec::flatten());
    else
      throw format_error("checkpoint: unknown layer kind " + kind);
  }
  const auto& shape = header.at("input_shape");
  TensorShape input = shape.at("spatial").get<bool>()
                          ? TensorShape::chw(shape.at("c").get<int>(), shape.at("h").get<int>(),
                                             shape.at("w").get<int>())
                          : TensorShape::vec(shape.at("width").get<int>());
  Network net(std::move(layers), input, header.at("class_count").get<std::size_t>());
  const std::size_t count = header.at("weight_count").get<std::size_t>();
  if (count != net.weight_count()) throw format_error("checkpoint: weight count mismatch");
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) w[i] = get_f64(blob, pos);
  if (pos != blob.size()) throw format_error("checkpoint: trailing bytes");
  net.set_weights(w);
  return net;
}

}  // namespace lsbound
