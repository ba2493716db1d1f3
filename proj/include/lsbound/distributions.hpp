#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lsbound/rng.hpp"

namespace lsbound {

// Standard-deviation floor applied by empirical_label_stats; keeps later
// per-label variance factors strictly positive.
inline constexpr double kSigmaFloor = 1e-6;

// Tolerance for label marginals summing to one; inputs outside it are
// rejected rather than renormalized.
inline constexpr double kMarginalTolerance = 1e-12;

struct DiagonalGaussian {
  std::vector<double> mean;
  std::vector<double> variance;

  DiagonalGaussian() = default;
  DiagonalGaussian(std::vector<double> mean_, std::vector<double> variance_);

  std::size_t dim() const { return mean.size(); }

  static DiagonalGaussian isotropic(std::size_t dim, double mean_value, double variance_value);
};

struct Sample {
  std::vector<double> x;
  std::size_t y = 0;
};

struct LabeledMixture {
  std::vector<double> label_marginals;
  std::vector<DiagonalGaussian> components;

  LabeledMixture() = default;
  LabeledMixture(std::vector<double> marginals, std::vector<DiagonalGaussian> comps);

  std::size_t num_labels() const { return label_marginals.size(); }
  std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }
};

// k components with means radius*e_{y mod d} and equal isotropic variance;
// permutation-symmetric across labels when k <= d.
LabeledMixture axis_mixture(std::size_t k, std::size_t d, double radius, double sigma);

// Addressable draw i from a Gaussian; sampling is a pure function of
// (distribution, seed, i), so chunked parallel consumers see identical bits.
class GaussianSampler {
 public:
  GaussianSampler(const DiagonalGaussian& g, std::uint64_t seed);
  void draw(std::uint64_t i, std::vector<double>& out) const;

 private:
  const DiagonalGaussian* g_;
  RandomStream stream_;
};

class MixtureSampler {
 public:
  MixtureSampler(const LabeledMixture& m, std::uint64_t seed);
  void draw(std::uint64_t i, Sample& out) const;
  std::size_t draw_label(std::uint64_t i) const;

 private:
  const LabeledMixture* m_;
  RandomStream labels_;
  RandomStream xs_;
};

// n i.i.d. draws; a deterministic function of (g, n, seed). Draw i is
// addressable, so prefixes agree across different n.
std::vector<std::vector<double>> sample_gaussian(const DiagonalGaussian& g, std::size_t n,
                                                 std::uint64_t seed);

std::vector<Sample> sample_mixture(const LabeledMixture& m, std::size_t n, std::uint64_t seed);

// KL(q || p) for diagonal Gaussians, in nats.
double kl_diag_gaussian(const DiagonalGaussian& q, const DiagonalGaussian& p);

struct LabelStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // n-1 divisor, floored at kSigmaFloor
  std::size_t count = 0;
};

// Per-label mean / standard deviation; every label in [0, k) must appear at
// least twice.
std::vector<LabelStats> empirical_label_stats(std::span<const Sample> data, std::size_t k);

}  // namespace lsbound
