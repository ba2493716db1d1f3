#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lsbound/distributions.hpp"

namespace lsbound {

// Absolute floor added to the 3-sigma band in identity checks.
inline constexpr double kIdentityAbsFloor = 1e-4;

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

using SampleFn = std::function<double(const Sample&)>;
using VectorFn = std::function<double(std::span<const double>)>;
using VectorGradFn = std::function<std::vector<double>(std::span<const double>)>;

// Ent[F] = E[F log F] - E[F] log E[F] of a finite distribution, with the
// 0 log 0 = 0 convention. Non-negative by Jensen.
double functional_entropy(std::span<const double> values, std::span<const double> weights);

// Plug-in Monte Carlo estimate of Ent_D[f] with a jackknife standard error.
McEstimate functional_entropy_mc(const SampleFn& f, const LabeledMixture& dist, std::size_t n,
                                 std::uint64_t seed);

// Sample mean with standard error, exposed for reuse by estimators.
McEstimate mean_estimate(std::span<const double> values);

struct MgfCurve {
  std::vector<double> alphas;
  std::vector<double> values;
  std::vector<double> std_errors;
};

// M(alpha) = E[exp(-alpha * loss)] on a grid; one common sample set serves
// every grid point, so the curve is exactly non-increasing.
MgfCurve mgf_curve(const SampleFn& loss, const LabeledMixture& dist, std::span<const double> alphas,
                   std::size_t n, std::uint64_t seed);

// log E_{S~D^m} exp(lambda (L_D - L_S)) computed through the product
// decomposition lambda*L_D + m*log M(lambda/m).
McEstimate herbst_lhs(const SampleFn& loss, const LabeledMixture& dist, double lambda,
                      std::size_t m, std::size_t n, std::uint64_t seed);

// Geometric-then-uniform grid on [0, alpha_max]; first point is 0, where the
// integrand is evaluated by its analytic limit Var(loss)/2.
std::vector<double> herbst_alpha_grid(double alpha_max, std::size_t n_points = 64);

struct HerbstRhs {
  McEstimate estimate;
  std::vector<double> grid;
  std::vector<double> integrand;
};

// lambda * integral over (0, lambda/m] of Ent[e^{-a loss}] / (a^2 E[e^{-a loss}]),
// composite trapezoid over the supplied grid.
HerbstRhs herbst_rhs(const SampleFn& loss, const LabeledMixture& dist, double lambda, std::size_t m,
                     std::span<const double> alpha_grid, std::size_t n, std::uint64_t seed);

struct LsiGap {
  McEstimate lhs;  // Ent[e^f]
  McEstimate rhs;  // (1/2) E[ ||sigma . grad f||^2 e^f ]
};

// Both sides of the Gaussian log-Sobolev inequality under g, estimated on one
// common sample set. grad_f is spot-checked against finite differences.
LsiGap gaussian_lsi_gap(const VectorFn& f, const VectorGradFn& grad_f, const DiagonalGaussian& g,
                        std::size_t n, std::uint64_t seed);

struct ExactGap {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Exact enumeration of the Rademacher LSI over {-1,+1}^d with the discrete
// per-coordinate gradient (f(z) - f(flip_i z))/2; requires d <= 20.
ExactGap rademacher_lsi_gap(const VectorFn& f, std::size_t d);

struct EntropyDecomposition {
  McEstimate total;
  McEstimate within_sum;
  McEstimate between;
  bool exact = false;
};

// Ent_D[f] versus sum_y D_y Ent_{N_y}[f] + Ent_{D_y}[E_{N_y} f]. Point-mass
// mixtures are enumerated exactly; Gaussian components are sampled with
// correlated per-label pools.
EntropyDecomposition entropy_decomposition_check(const SampleFn& f, const LabeledMixture& mix,
                                                 std::size_t n, std::uint64_t seed);

}  // namespace lsbound
