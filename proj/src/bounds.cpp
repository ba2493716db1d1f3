#include "lsbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lsbound/errors.hpp"
#include "lsbound/parallel.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

SigmaY SigmaY::scalar(double value, std::string provenance) {
  if (!(value > 0.0)) throw invalid_input_error("SigmaY: scalar sigma_y must be > 0");
  SigmaY s;
  s.scalar_ = value;
  s.provenance_ = std::move(provenance);
  return s;
}

SigmaY SigmaY::per_label(std::vector<std::vector<double>> stds, std::string provenance) {
  if (stds.empty()) throw invalid_input_error("SigmaY: empty per-label table");
  for (const auto& row : stds) {
    if (row.empty()) throw invalid_input_error("SigmaY: empty per-label row");
    for (double v : row)
      if (!(v > 0.0)) throw invalid_input_error("SigmaY: per-label std must be > 0");
  }
  SigmaY s;
  s.per_label_ = std::move(stds);
  s.provenance_ = std::move(provenance);
  return s;
}

SigmaY SigmaY::from_mixture(const LabeledMixture& mix) {
  std::vector<std::vector<double>> stds(mix.num_labels());
  for (std::size_t y = 0; y < mix.num_labels(); ++y) {
    stds[y].resize(mix.dim());
    for (std::size_t j = 0; j < mix.dim(); ++j) {
      const double sd = std::sqrt(mix.components[y].variance[j]);
      stds[y][j] = sd < kSigmaFloor ? kSigmaFloor : sd;
    }
  }
  return per_label(std::move(stds), "mixture");
}

SigmaY SigmaY::from_label_stats(const std::vector<LabelStats>& stats) {
  std::vector<std::vector<double>> stds(stats.size());
  for (std::size_t y = 0; y < stats.size(); ++y) stds[y] = stats[y].stddev;
  return per_label(std::move(stds), "estimated");
}

double SigmaY::std_for(std::size_t label, std::size_t dim) const {
  if (scalar_) return *scalar_;
  if (label >= per_label_.size()) throw invalid_input_error("SigmaY: label out of range");
  if (dim >= per_label_[label].size()) throw invalid_input_error("SigmaY: dim out of range");
  return per_label_[label][dim];
}

double SigmaY::max_variance() const {
  if (scalar_) return *scalar_ * *scalar_;
  double best = 0.0;
  for (const auto& row : per_label_)
    for (double v : row) best = std::max(best, v * v);
  return best;
}

void BoundInput::validate() const {
  if (!(lambda > 0.0)) throw invalid_input_error("BoundInput: lambda must be > 0");
  if (m < 1) throw invalid_input_error("BoundInput: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw invalid_input_error("BoundInput: delta must be in (0,1)");
  if (!(sigma_p2 > 0.0)) throw invalid_input_error("BoundInput: sigma_p2 must be > 0");
}

double linear_lambda_max(double g, double sigma_p, double sigma_y, std::size_t m) {
  if (!(g > 0.0) || !(sigma_p > 0.0) || !(sigma_y > 0.0))
    throw invalid_input_error("linear_lambda_max: g, sigma_p and sigma_y must be > 0");
  if (m < 1) throw invalid_input_error("linear_lambda_max: m must be >= 1");
  return std::sqrt(static_cast<double>(m) / 16.0) / (g * sigma_p * sigma_y);
}

double linear_complexity(std::size_t k, std::size_t d) {
  if (k < 1 || d < 1) throw invalid_input_error("linear_complexity: k and d must be >= 1");
  return static_cast<double>(k) * static_cast<double>(d) * 0.5 * std::log(4.0 / 3.0);
}

double gaussian_quadratic_mgf(double c, double sigma_p2, std::size_t n_dims) {
  if (!(sigma_p2 > 0.0)) throw invalid_input_error("gaussian_quadratic_mgf: sigma_p2 must be > 0");
  if (n_dims < 1) throw invalid_input_error("gaussian_quadratic_mgf: n_dims must be >= 1");
  const double t = 2.0 * c * sigma_p2;
  if (t >= 1.0)
    throw constraint_error("gaussian_quadratic_mgf: divergent integral, 2 c sigma_p2 = " +
                           std::to_string(t) + " >= 1");
  return -0.5 * static_cast<double>(n_dims) * std::log1p(-t);
}

McEstimate gaussian_quadratic_mgf_mc(double c, double sigma_p2, std::size_t n_dims, std::size_t n,
                                     std::uint64_t seed) {
  if (!(sigma_p2 > 0.0)) throw invalid_input_error("gaussian_quadratic_mgf_mc: sigma_p2 must be > 0");
  if (n_dims < 1 || n < 2)
    throw invalid_input_error("gaussian_quadratic_mgf_mc: need n_dims >= 1 and n >= 2");
  const double t = 2.0 * c * sigma_p2;
  if (t >= 1.0)
    throw constraint_error("gaussian_quadratic_mgf_mc: divergent integral, 2 c sigma_p2 = " +
                           std::to_string(t) + " >= 1");
  // Importance sampling from a partially tilted proposal N(0, sq2 I). The
  // estimator stays unbiased through the elementary Gaussian density ratio,
  // while a plain N(0, sigma_p2) proposal has infinite variance once
  // 2 c sigma_p2 > 1/2. tau = 0.95 keeps the fourth moment finite up to
  // 2 c sigma_p2 ~ 0.87, so jackknife standard errors are calibrated across
  // the checked range.
  const double tau = 0.95;
  const double denom = 1.0 - tau * t;
  const double sq2 = sigma_p2 / denom;
  const double log_ratio = 0.5 * static_cast<double>(n_dims) * std::log(sq2 / sigma_p2);
  const double residual_c = (1.0 - tau) * c;
  RandomStream stream(seed, "quadratic_mgf");
  std::vector<double> values(n);
  const double sd = std::sqrt(sq2);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double q = 0.0;
      const std::uint64_t base = static_cast<std::uint64_t>(i) * n_dims;
      for (std::size_t j = 0; j < n_dims; ++j) {
        const double w = sd * stream.normal(base + j);
        q += w * w;
      }
      values[i] = std::exp(log_ratio + residual_c * q);
      if (!std::isfinite(values[i]))
        throw evaluation_error("gaussian_quadratic_mgf_mc: exp overflow in a draw");
    }
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  const double nn = static_cast<double>(n);
  const double plug = std::log(sum / nn);
  // Jackknife on the log of the mean.
  double sd_acc = 0.0, s_acc = 0.0;
  for (double v : values) {
    const double diff = std::log((sum - v) / (nn - 1.0)) - plug;
    s_acc += diff;
    sd_acc += diff * diff;
  }
  const double ss = sd_acc - s_acc * s_acc / nn;
  const double se = std::sqrt((nn - 1.0) / nn * (ss > 0.0 ? ss : 0.0));
  return McEstimate{plug, se, n};
}

double global_onaverage_complexity(const BoundInput& in) {
  in.validate();
  if (!in.b || !in.g)
    throw invalid_input_error("global_onaverage_complexity: requires both b and g");
  if (!(*in.g >= 0.0)) throw invalid_input_error("global_onaverage_complexity: g must be >= 0");
  if (in.lambda > static_cast<double>(in.m))
    throw constraint_error("global_onaverage_complexity: lambda " + std::to_string(in.lambda) +
                           " exceeds m = " + std::to_string(in.m));
  if (*in.g == 0.0) return 0.0;
  const double sy2 = in.sigma_y.max_variance();
  return in.lambda * in.lambda * std::exp(*in.b) * *in.g * sy2 /
         (2.0 * static_cast<double>(in.m));
}

namespace {

struct DrawStats {
  double b = 0.0;
  double g = 0.0;
};

DrawStats estimate_draw(const Network& arch, LossKind kind, std::span<const double> w,
                        const LabeledMixture& dist, const SigmaY& sigma_y, std::size_t n_data,
                        std::uint64_t data_seed) {
  Network net = arch;
  net.set_weights(w);
  MixtureSampler sampler(dist, data_seed);
  Workspace ws;
  Sample s;
  std::vector<double> grad;
  double sum_loss = 0.0, sum_g = 0.0;
  for (std::size_t i = 0; i < n_data; ++i) {
    sampler.draw(i, s);
    sum_loss += backprop(net, s.x, s.y, kind, ws, &grad, nullptr);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < grad.size(); ++j) {
      const double v = sigma_y.std_for(s.y, j) * grad[j];
      norm2 += v * v;
    }
    sum_g += norm2;
  }
  const double nn = static_cast<double>(n_data);
  return DrawStats{sum_loss / nn, sum_g / nn};
}

}  // namespace

PerWComplexity per_w_complexity(const Network& arch, LossKind kind, const DiagonalGaussian& prior,
                                const LabeledMixture& dist, const BoundInput& in) {
  in.validate();
  if (in.lambda > static_cast<double>(in.m))
    throw constraint_error("per_w_complexity: lambda " + std::to_string(in.lambda) +
                           " exceeds m = " + std::to_string(in.m));
  if (prior.dim() != arch.weight_count())
    throw invalid_input_error("per_w_complexity: prior dimension must equal the weight count");
  const std::size_t J = in.mc.n_prior;
  if (J < 1) throw invalid_input_error("per_w_complexity: n_prior must be >= 1");
  if (in.mc.n_data < 1) throw invalid_input_error("per_w_complexity: n_data must be >= 1");

  PerWComplexity out;
  out.b.resize(J);
  out.g.resize(J);
  out.exponents.resize(J);

  struct Empty {};
  chunked_reduce<Empty>(
      J,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> w(prior.dim());
        for (std::size_t j = begin; j < end; ++j) {
          RandomStream wstream(in.mc.seed, "prior_w", j);
          for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = prior.mean[i] + std::sqrt(prior.variance[i]) * wstream.normal(i);
          const DrawStats st = estimate_draw(arch, kind, w, dist, in.sigma_y, in.mc.n_data,
                                             derive_seed(in.mc.seed, "perw_data", j));
          out.b[j] = st.b;
          out.g[j] = st.g;
        }
        return Empty{};
      },
      Empty{}, [](Empty, Empty) { return Empty{}; }, /*chunk=*/1, in.mc.threads);

  const double lambda2_over_2m = in.lambda * in.lambda / (2.0 * static_cast<double>(in.m));
  for (std::size_t j = 0; j < J; ++j) {
    if (out.g[j] == 0.0) {
      out.exponents[j] = 0.0;
      continue;
    }
    const double log_e = std::log(lambda2_over_2m) + out.b[j] + std::log(out.g[j]);
    out.exponents[j] = std::exp(log_e);
  }

  const double shift = *std::max_element(out.exponents.begin(), out.exponents.end());
  if (!std::isfinite(shift)) {
    out.overflow = true;
    out.value = std::numeric_limits<double>::infinity();
    std::ostringstream os;
    os << "exponent overflow after shift; offending draws:";
    for (std::size_t j = 0; j < J; ++j)
      if (!std::isfinite(out.exponents[j]))
        os << " (b=" << out.b[j] << ", g=" << out.g[j] << ")";
    out.diagnostic = os.str();
    return out;
  }
  double mean_exp = 0.0;
  for (double e : out.exponents) mean_exp += std::exp(e - shift);
  mean_exp /= static_cast<double>(J);
  out.value = shift + std::log(mean_exp);
  if (out.value < 0.0) out.value = 0.0;  // exponents >= 0, so C >= 0 up to rounding
  return out;
}

double baseline_bounded_complexity(double B, double lambda, std::size_t m) {
  if (!(B >= 0.0)) throw invalid_input_error("baseline_bounded_complexity: B must be >= 0");
  if (!(lambda > 0.0)) throw invalid_input_error("baseline_bounded_complexity: lambda must be > 0");
  if (m < 1) throw invalid_input_error("baseline_bounded_complexity: m must be >= 1");
  return lambda * lambda * B * B / (2.0 * static_cast<double>(m));
}

BoundReport assemble_bound(double empirical_risk, double complexity, double kl,
                           const BoundInput& in, std::string theorem) {
  in.validate();
  if (!std::isfinite(empirical_risk))
    throw invalid_input_error("assemble_bound: non-finite empirical risk");
  if (!(kl >= 0.0)) throw invalid_input_error("assemble_bound: kl must be >= 0");
  BoundReport r;
  r.theorem = std::move(theorem);
  r.complexity = complexity;
  r.kl = kl;
  r.empirical_risk = empirical_risk;
  r.log_inv_delta = std::log(1.0 / in.delta);
  r.lambda_used = in.lambda;
  r.rhs = empirical_risk + (complexity + kl + r.log_inv_delta) / in.lambda;
  r.flagged = !std::isfinite(complexity);
  r.metadata["rng"] = kRngName;
  r.metadata["seed"] = std::to_string(in.mc.seed);
  r.metadata["n_prior"] = std::to_string(in.mc.n_prior);
  r.metadata["n_data"] = std::to_string(in.mc.n_data);
  r.metadata["n_posterior"] = std::to_string(in.mc.n_posterior);
  r.metadata["m"] = std::to_string(in.m);
  r.metadata["delta"] = std::to_string(in.delta);
  r.metadata["sigma_p2"] = std::to_string(in.sigma_p2);
  r.metadata["sigma_y"] = in.sigma_y.provenance();
  return r;
}

namespace {

std::vector<double> posterior_draw(const DiagonalGaussian& q, std::uint64_t seed, std::size_t j) {
  RandomStream stream(seed, "posterior_w", j);
  std::vector<double> w(q.dim());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = q.mean[i] + std::sqrt(q.variance[i]) * stream.normal(i);
  return w;
}

McEstimate mean_over_draws(std::span<const double> values) {
  return mean_estimate(values);
}

}  // namespace

RiskEstimates expected_risks_heldout(const Network& arch, LossKind kind,
                                     const DiagonalGaussian& posterior,
                                     std::span<const Sample> train,
                                     std::span<const Sample> heldout, const McSettings& mc) {
  if (train.empty()) throw invalid_input_error("expected_risks: empty training set");
  if (heldout.empty()) throw invalid_input_error("expected_risks: empty held-out set");
  if (posterior.dim() != arch.weight_count())
    throw invalid_input_error("expected_risks: posterior dimension must equal the weight count");
  const std::size_t J = std::max<std::size_t>(1, mc.n_posterior);

  std::vector<double> train_means(J), held_means(J);
  std::vector<double> held_profile(heldout.size(), 0.0);  // draw-averaged per-sample loss
  Network net = arch;
  Workspace ws;
  for (std::size_t j = 0; j < J; ++j) {
    net.set_weights(posterior_draw(posterior, mc.seed, j));
    double s = 0.0;
    for (const Sample& smp : train) s += loss(net, smp.x, smp.y, kind, ws);
    train_means[j] = s / static_cast<double>(train.size());
    double h = 0.0;
    for (std::size_t i = 0; i < heldout.size(); ++i) {
      const double v = loss(net, heldout[i].x, heldout[i].y, kind, ws);
      held_profile[i] += v;
      h += v;
    }
    held_means[j] = h / static_cast<double>(heldout.size());
  }

  RiskEstimates out;
  out.train = mean_over_draws(train_means);
  const McEstimate across_draws = mean_over_draws(held_means);
  for (double& v : held_profile) v /= static_cast<double>(J);
  const McEstimate across_samples = mean_estimate(held_profile);
  out.true_risk = McEstimate{
      across_draws.value,
      std::sqrt(across_draws.std_error * across_draws.std_error +
                across_samples.std_error * across_samples.std_error),
      J * heldout.size()};
  return out;
}

RiskEstimates expected_risks(const Network& arch, LossKind kind, const DiagonalGaussian& posterior,
                             std::span<const Sample> train, const LabeledMixture& dist,
                             const McSettings& mc) {
  if (mc.n_data < 1) throw invalid_input_error("expected_risks: n_data must be >= 1");
  const std::vector<Sample> fresh =
      sample_mixture(dist, mc.n_data, derive_seed(mc.seed, "risk_data"));
  return expected_risks_heldout(arch, kind, posterior, train, fresh, mc);
}

BalanceStats per_label_loss_stats(const Network& net, LossKind kind,
                                  std::span<const Sample> data) {
  if (data.empty()) throw invalid_input_error("per_label_loss_stats: empty data");
  const std::size_t k = net.class_count();
  BalanceStats st;
  st.per_label_mean.assign(k, 0.0);
  st.counts.assign(k, 0);
  Workspace ws;
  double total = 0.0;
  for (const Sample& s : data) {
    if (s.y >= k) throw invalid_input_error("per_label_loss_stats: label out of range");
    const double v = loss(net, s.x, s.y, kind, ws);
    st.per_label_mean[s.y] += v;
    ++st.counts[s.y];
    total += v;
  }
  st.overall_mean = total / static_cast<double>(data.size());
  std::size_t present = 0;
  double mean_of_means = 0.0;
  for (std::size_t y = 0; y < k; ++y)
    if (st.counts[y] > 0) {
      st.per_label_mean[y] /= static_cast<double>(st.counts[y]);
      mean_of_means += st.per_label_mean[y];
      ++present;
    }
  if (present > 1) {
    mean_of_means /= static_cast<double>(present);
    double ss = 0.0;
    for (std::size_t y = 0; y < k; ++y)
      if (st.counts[y] > 0) {
        const double d = st.per_label_mean[y] - mean_of_means;
        ss += d * d;
      }
    st.across_label_std = std::sqrt(ss / static_cast<double>(present - 1));
  }
  return st;
}

BalanceStats prior_balance_stats(const Network& arch, LossKind kind,
                                 const DiagonalGaussian& prior, const LabeledMixture& dist,
                                 const McSettings& mc) {
  if (prior.dim() != arch.weight_count())
    throw invalid_input_error("prior_balance_stats: prior dimension must equal the weight count");
  const std::size_t k = dist.num_labels();
  const std::size_t per_label = std::max<std::size_t>(2, mc.n_data / std::max<std::size_t>(1, k));
  const std::size_t J = std::max<std::size_t>(1, mc.n_prior);

  BalanceStats st;
  st.per_label_mean.assign(k, 0.0);
  st.counts.assign(k, per_label * J);

  Network net = arch;
  Workspace ws;
  std::vector<double> w(prior.dim());
  Sample s;
  for (std::size_t j = 0; j < J; ++j) {
    RandomStream wstream(mc.seed, "prior_w", j);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = prior.mean[i] + std::sqrt(prior.variance[i]) * wstream.normal(i);
    net.set_weights(w);
    for (std::size_t y = 0; y < k; ++y) {
      GaussianSampler sampler(dist.components[y], derive_seed(mc.seed, "balance_x", y * J + j));
      s.y = y;
      double acc = 0.0;
      for (std::size_t i = 0; i < per_label; ++i) {
        sampler.draw(i, s.x);
        acc += loss(net, s.x, s.y, kind, ws);
      }
      st.per_label_mean[y] += acc / static_cast<double>(per_label);
    }
  }
  double mean_of_means = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    st.per_label_mean[y] /= static_cast<double>(J);
    mean_of_means += st.per_label_mean[y];
  }
  mean_of_means /= static_cast<double>(k);
  st.overall_mean = mean_of_means;
  if (k > 1) {
    double ss = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      const double d = st.per_label_mean[y] - mean_of_means;
      ss += d * d;
    }
    st.across_label_std = std::sqrt(ss / static_cast<double>(k - 1));
  }
  return st;
}

}  // namespace lsbound
