#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lsbound/distributions.hpp"

namespace lsbound {

enum class LayerKind { Dense, Conv2d, Relu, MaxPool2d, Flatten };

enum class LossKind { Nll, MulticlassHinge };

const char* to_string(LayerKind kind);
const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct LayerSpec {
  LayerKind kind;
  // dense
  int in_width = 0;
  int out_width = 0;
  // conv2d (stride 1, valid); maxpool2d is fixed 2x2 stride 2
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;

  static LayerSpec dense(int in, int out);
  static LayerSpec conv2d(int in_channels, int out_channels, int kernel);
  static LayerSpec relu();
  static LayerSpec maxpool2d();
  static LayerSpec flatten();

  std::size_t weight_count() const;
};

struct TensorShape {
  int c = 0;
  int h = 0;
  int w = 0;
  bool spatial = false;
  int width = 0;  // flattened width when not spatial

  static TensorShape vec(int width);
  static TensorShape chw(int c, int h, int w);
  std::size_t size() const;
};

// Feedforward stack over a flat weight vector with per-layer offsets.
// Immutable during evaluation; training mutates weights() in place.
class Network {
 public:
  Network(std::vector<LayerSpec> layers, TensorShape input_shape, std::size_t class_count);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const TensorShape& input_shape() const { return input_shape_; }
  const TensorShape& shape_after(std::size_t layer) const { return shapes_[layer]; }
  std::size_t input_dim() const { return input_shape_.size(); }
  std::size_t class_count() const { return class_count_; }
  std::size_t weight_count() const { return weights_.size(); }
  std::size_t layer_offset(std::size_t layer) const { return offsets_[layer]; }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }
  void set_weights(std::span<const double> w);

  std::string describe() const;

 private:
  std::vector<LayerSpec> layers_;
  TensorShape input_shape_;
  std::size_t class_count_;
  std::vector<TensorShape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> weights_;
};

// Reusable buffers for forward/backward passes; one per thread.
struct Workspace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<int>> pool_idx;
  std::vector<std::vector<double>> grads;
  std::vector<double> dlogits;
};

std::vector<double> forward(const Network& net, std::span<const double> x);
double loss_from_logits(std::span<const double> logits, std::size_t y, LossKind kind);
std::vector<double> dloss_dlogits(std::span<const double> logits, std::size_t y, LossKind kind);
double loss(const Network& net, std::span<const double> x, std::size_t y, LossKind kind);
double loss(const Network& net, std::span<const double> x, std::size_t y, LossKind kind,
            Workspace& ws);

// Single fused pass; accumulates into *weight_grad when non-null (caller
// zeroes), fills *input_grad when non-null. Returns the sample loss.
double backprop(const Network& net, std::span<const double> x, std::size_t y, LossKind kind,
                Workspace& ws, std::vector<double>* input_grad, std::vector<double>* weight_grad);

std::vector<double> input_gradient(const Network& net, std::span<const double> x, std::size_t y,
                                   LossKind kind);
std::vector<double> weight_gradient(const Network& net, std::span<const Sample> batch,
                                    LossKind kind);

// Lipschitz constant of the per-logit loss: sqrt(2) for both supported kinds.
double lipschitz_bound_hat_loss(LossKind kind, std::size_t k);

Network make_linear(std::size_t d, std::size_t k);

// depth dense layers with ReLU between; hidden width chosen so the parameter
// count roughly matches param_budget (default: the linear model's d*k).
Network make_mlp(std::size_t d, std::size_t k, int depth, std::size_t param_budget = 0);

Network make_cnn(TensorShape input, std::size_t k, int conv_layers, int channels, int kernel,
                 std::size_t fc_width);

// Per-layer centered uniform with scale 1/sqrt(fan_in).
void init_uniform_fanin(Network& net, std::uint64_t seed);
// w ~ N(0, sigma_p2 I), the prior used by the sampling experiments.
void init_gaussian(Network& net, double sigma2, std::uint64_t seed);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

}  // namespace lsbound
