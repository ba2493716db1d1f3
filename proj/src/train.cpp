#include "lsbound/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "lsbound/errors.hpp"
#include "lsbound/parallel.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw invalid_input_error("TrainConfig: learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw invalid_input_error("TrainConfig: momentum must be in [0,1)");
  if (batch_size < 1) throw invalid_input_error("TrainConfig: batch_size must be >= 1");
  if (epochs < 0) throw invalid_input_error("TrainConfig: epochs must be >= 0");
}

void MomentumSgd::step(std::span<double> w, std::span<const double> grad) {
  if (w.size() != velocity.size() || grad.size() != velocity.size())
    throw invalid_input_error("MomentumSgd: dimension mismatch");
  for (std::size_t i = 0; i < w.size(); ++i) {
    velocity[i] = momentum * velocity[i] - learning_rate * grad[i];
    w[i] += velocity[i];
  }
}

TrainTrace sgd_train(Network& net, std::span<const Sample> data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw invalid_input_error("sgd_train: empty training data");
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t n = data.size();
  MomentumSgd opt(cfg.learning_rate, cfg.momentum, net.weight_count());
  Workspace ws;
  std::vector<double> grad(net.weight_count());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainTrace trace;
  trace.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates from the run seed; one stream per epoch.
    RandomStream shuffle(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = shuffle.below(n - 1 - i, i + 1);
      std::swap(order[i], order[j]);
    }
    double epoch_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const std::size_t bs = end - start;
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const Sample& s = data[order[i]];
        batch_loss += backprop(net, s.x, s.y, cfg.loss, ws, nullptr, &grad);
      }
      batch_loss /= static_cast<double>(bs);
      if (!std::isfinite(batch_loss) || batch_loss > kDivergenceThreshold)
        throw divergence_error("sgd_train: loss " + std::to_string(batch_loss) +
                               " diverged at epoch " + std::to_string(epoch) + ", batch " +
                               std::to_string(batch_index));
      const double inv = 1.0 / static_cast<double>(bs);
      for (double& g : grad) g *= inv;
      opt.step(net.weights(), grad);
      epoch_sum += batch_loss * static_cast<double>(bs);
    }
    trace.epoch_loss.push_back(epoch_sum / static_cast<double>(n));
  }

  trace.final_weights.assign(net.weights().begin(), net.weights().end());
  const BalanceStats balance = per_label_loss_stats(net, cfg.loss, data);
  trace.per_label_mean_loss = balance.per_label_mean;
  trace.label_loss_std = balance.across_label_std;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return trace;
}

std::vector<PriorSweepRow> prior_sweep_stats(const Network& arch,
                                             std::span<const double> sigma_p2_grid,
                                             const LabeledMixture& dist, LossKind kind,
                                             const McSettings& mc) {
  if (sigma_p2_grid.empty()) throw invalid_input_error("prior_sweep_stats: empty grid");
  if (mc.n_prior < 1 || mc.n_data < 1)
    throw invalid_input_error("prior_sweep_stats: n_prior and n_data must be >= 1");
  for (double sigma_p2 : sigma_p2_grid)
    if (!(sigma_p2 >= 0.0)) throw invalid_input_error("prior_sweep_stats: sigma_p2 must be >= 0");

  // (grid point, prior draw) units are independent: each owns a derived
  // stream, so the parallel layout below is deterministic for any thread
  // count. Reduction happens in unit order.
  const std::size_t units = sigma_p2_grid.size() * mc.n_prior;
  std::vector<double> unit_loss(units, 0.0), unit_grad(units, 0.0);
  struct Empty {};
  chunked_reduce<Empty>(
      units,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        Network net = arch;
        Workspace ws;
        std::vector<double> grad;
        Sample s;
        for (std::size_t u = begin; u < end; ++u) {
          const std::size_t gi = u / mc.n_prior;
          const double sd = std::sqrt(sigma_p2_grid[gi]);
          RandomStream wstream(mc.seed, "prior_w", u);
          auto w = net.weights();
          for (std::size_t i = 0; i < w.size(); ++i) w[i] = sd * wstream.normal(i);
          MixtureSampler sampler(dist, derive_seed(mc.seed, "sweep_data", u));
          double l = 0.0, g2 = 0.0;
          for (std::size_t i = 0; i < mc.n_data; ++i) {
            sampler.draw(i, s);
            l += backprop(net, s.x, s.y, kind, ws, &grad, nullptr);
            for (double v : grad) g2 += v * v;
          }
          unit_loss[u] = l / static_cast<double>(mc.n_data);
          unit_grad[u] = g2 / static_cast<double>(mc.n_data);
        }
        return Empty{};
      },
      Empty{}, [](Empty, Empty) { return Empty{}; }, /*chunk=*/1, mc.threads);

  std::vector<PriorSweepRow> rows;
  rows.reserve(sigma_p2_grid.size());
  for (std::size_t gi = 0; gi < sigma_p2_grid.size(); ++gi) {
    double loss_acc = 0.0, grad_acc = 0.0;
    for (std::size_t j = 0; j < mc.n_prior; ++j) {
      loss_acc += unit_loss[gi * mc.n_prior + j];
      grad_acc += unit_grad[gi * mc.n_prior + j];
    }
    rows.push_back(PriorSweepRow{sigma_p2_grid[gi], loss_acc / static_cast<double>(mc.n_prior),
                                 grad_acc / static_cast<double>(mc.n_prior)});
  }
  return rows;
}

DepthSweepResult depth_sweep_complexity(std::span<const int> depths, const LabeledMixture& dist,
                                        LossKind kind, const BoundInput& in,
                                        std::size_t param_budget) {
  if (depths.empty()) throw invalid_input_error("depth_sweep_complexity: empty depth list");
  DepthSweepResult out;
  out.rows.reserve(depths.size());
  const std::size_t d = dist.dim();
  const std::size_t k = dist.num_labels();
  for (int depth : depths) {
    Network arch = make_mlp(d, k, depth, param_budget);
    std::size_t hidden = 0;
    for (const auto& layer : arch.layers())
      if (layer.kind == LayerKind::Dense && layer.out_width != static_cast<int>(k))
        hidden = static_cast<std::size_t>(layer.out_width);
    BoundInput per_depth = in;
    per_depth.mc.seed = derive_seed(in.mc.seed, "depth", static_cast<std::uint64_t>(depth));
    const DiagonalGaussian prior =
        DiagonalGaussian::isotropic(arch.weight_count(), 0.0, in.sigma_p2);
    const PerWComplexity c = per_w_complexity(arch, kind, prior, dist, per_depth);
    out.rows.push_back(DepthSweepRow{depth, hidden, c.value, c.overflow});
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].complexity > out.rows[i - 1].complexity) out.monotone_non_increasing = false;
  return out;
}

}  // namespace lsbound
