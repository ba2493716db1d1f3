#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsbound/bounds.hpp"
#include "lsbound/models.hpp"

namespace lsbound {

// Any batch loss above this (or non-finite) aborts training.
inline constexpr double kDivergenceThreshold = 1e6;

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 128;
  int epochs = 50;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::Nll;

  void validate() const;
};

struct TrainTrace {
  std::vector<double> epoch_loss;  // mean pre-update batch loss per epoch
  std::vector<double> final_weights;
  double wall_seconds = 0.0;
  // Balance statistics on the training set after the final epoch.
  std::vector<double> per_label_mean_loss;
  double label_loss_std = 0.0;
};

// Classic momentum update: v <- mu v - eta grad; w <- w + v.
struct MomentumSgd {
  double learning_rate;
  double momentum;
  std::vector<double> velocity;

  MomentumSgd(double lr, double mu, std::size_t dim)
      : learning_rate(lr), momentum(mu), velocity(dim, 0.0) {}

  void step(std::span<double> w, std::span<const double> grad);
};

// Deterministic SGD over shuffled epochs; the last partial batch is kept.
TrainTrace sgd_train(Network& net, std::span<const Sample> data, const TrainConfig& cfg);

struct PriorSweepRow {
  double sigma_p2 = 0.0;
  double mean_loss = 0.0;       // E_D loss averaged over prior draws
  double mean_grad_norm2 = 0.0; // E_D ||grad_x loss||^2 averaged over prior draws
};

// Loss / input-gradient-norm statistics under N(0, sigma_p2 I) priors.
std::vector<PriorSweepRow> prior_sweep_stats(const Network& arch, std::span<const double> sigma_p2_grid,
                                             const LabeledMixture& dist, LossKind kind,
                                             const McSettings& mc);

struct DepthSweepRow {
  int depth = 0;
  std::size_t hidden_width = 0;
  double complexity = 0.0;
  bool overflow = false;
};

struct DepthSweepResult {
  std::vector<DepthSweepRow> rows;
  bool monotone_non_increasing = true;
};

// per_w_complexity across MLP depths with equal-parameter widths; each depth
// uses seed derive_seed(in.mc.seed, "depth", depth).
DepthSweepResult depth_sweep_complexity(std::span<const int> depths, const LabeledMixture& dist,
                                        LossKind kind, const BoundInput& in,
                                        std::size_t param_budget = 0);

}  // namespace lsbound
