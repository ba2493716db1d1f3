#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsbound/distributions.hpp"
#include "lsbound/entropy.hpp"
#include "lsbound/models.hpp"

namespace lsbound {

struct McSettings {
  std::size_t n_prior = 64;
  std::size_t n_data = 4096;
  std::size_t n_posterior = 32;
  std::uint64_t seed = 0;
  int threads = 0;
};

// Per-label per-dimension data standard deviation, or a single scalar.
class SigmaY {
 public:
  static SigmaY scalar(double value, std::string provenance = "config");
  static SigmaY per_label(std::vector<std::vector<double>> stds,
                          std::string provenance = "config");
  static SigmaY from_mixture(const LabeledMixture& mix);
  static SigmaY from_label_stats(const std::vector<LabelStats>& stats);

  bool is_scalar() const { return scalar_.has_value(); }
  double std_for(std::size_t label, std::size_t dim) const;
  // Conservative resolution for scalar-formula theorems: max over labels and
  // dimensions of the variance.
  double max_variance() const;
  const std::string& provenance() const { return provenance_; }

 private:
  std::optional<double> scalar_;
  std::vector<std::vector<double>> per_label_;
  std::string provenance_;
};

struct BoundInput {
  double lambda = 1.0;
  std::size_t m = 1;
  double delta = 0.01;
  double sigma_p2 = 0.01;
  SigmaY sigma_y = SigmaY::scalar(1.0);
  std::optional<double> b;  // on-average loss bound (global theorem)
  std::optional<double> g;  // on-average squared-gradient bound (global theorem)
  McSettings mc;

  void validate() const;
};

// Largest lambda admitted by the linear-model theorem: sqrt(m/16)/(g sp sy).
double linear_lambda_max(double g, double sigma_p, double sigma_y, std::size_t m);

// k d log sqrt(4/3), the linear-model complexity constant.
double linear_complexity(std::size_t k, std::size_t d);

// log E_{w~N(0,sp2 I_n)} exp(c sum w^2) = -(n/2) log(1 - 2 c sp2).
double gaussian_quadratic_mgf(double c, double sigma_p2, std::size_t n_dims);
// Monte Carlo cross-check of the same quantity (importance sampling from a
// tilted Gaussian proposal; unbiased independently of the closed form).
McEstimate gaussian_quadratic_mgf_mc(double c, double sigma_p2, std::size_t n_dims, std::size_t n,
                                     std::uint64_t seed);

// lambda^2 e^b g sigma_y^2 / (2m); requires b, g and lambda <= m.
double global_onaverage_complexity(const BoundInput& in);

struct PerWComplexity {
  double value = 0.0;  // bound on C(lambda, p); +inf when an exponent overflows
  std::vector<double> b;          // per-draw on-average loss
  std::vector<double> g;          // per-draw E || sigma_y . grad_x loss ||^2
  std::vector<double> exponents;  // lambda^2 e^{b_j} g_j / (2m)
  bool overflow = false;
  std::string diagnostic;
};

// Prior-expectation complexity bound: log-mean-exp over prior draws of
// lambda^2 e^{b_j} g_j / (2m), with sigma_y folded elementwise into g_j.
PerWComplexity per_w_complexity(const Network& arch, LossKind kind, const DiagonalGaussian& prior,
                                const LabeledMixture& dist, const BoundInput& in);

// Bounded-loss baseline: lambda^2 B^2 / (2m).
double baseline_bounded_complexity(double B, double lambda, std::size_t m);

struct BoundReport {
  std::string theorem;
  double complexity = 0.0;
  double kl = 0.0;
  double empirical_risk = 0.0;
  double log_inv_delta = 0.0;
  double lambda_used = 0.0;
  double rhs = 0.0;
  bool flagged = false;  // non-finite complexity propagated into rhs
  std::map<std::string, std::string> metadata;
};

BoundReport assemble_bound(double empirical_risk, double complexity, double kl,
                           const BoundInput& in, std::string theorem);

struct RiskEstimates {
  McEstimate train;      // E_{w~q} L_S(w)
  McEstimate true_risk;  // E_{w~q} L_D(w), estimated on fresh draws or held-out data
};

// Posterior-averaged empirical and true risks; fresh mixture samples serve as
// the true-risk estimate in synthetic mode.
RiskEstimates expected_risks(const Network& arch, LossKind kind, const DiagonalGaussian& posterior,
                             std::span<const Sample> train, const LabeledMixture& dist,
                             const McSettings& mc);
RiskEstimates expected_risks_heldout(const Network& arch, LossKind kind,
                                     const DiagonalGaussian& posterior,
                                     std::span<const Sample> train,
                                     std::span<const Sample> heldout, const McSettings& mc);

struct BalanceStats {
  std::vector<double> per_label_mean;
  std::vector<std::size_t> counts;
  double overall_mean = 0.0;
  double across_label_std = 0.0;
};

// Mean loss per label plus the across-label spread (the balance statistic).
BalanceStats per_label_loss_stats(const Network& net, LossKind kind, std::span<const Sample> data);

// Same statistic averaged over prior draws, with stratified per-label samples.
BalanceStats prior_balance_stats(const Network& arch, LossKind kind,
                                 const DiagonalGaussian& prior, const LabeledMixture& dist,
                                 const McSettings& mc);

}  // namespace lsbound
