#include "lsbound/distributions.hpp"

#include <cmath>
#include <string>

#include "lsbound/errors.hpp"
#include "lsbound/parallel.hpp"

namespace lsbound {

DiagonalGaussian::DiagonalGaussian(std::vector<double> mean_, std::vector<double> variance_)
    : mean(std::move(mean_)), variance(std::move(variance_)) {
  if (mean.empty()) throw invalid_input_error("DiagonalGaussian: dimension must be >= 1");
  if (mean.size() != variance.size())
    throw invalid_input_error("DiagonalGaussian: mean and variance lengths differ");
  for (double v : variance)
    if (!(v >= 0.0)) throw invalid_input_error("DiagonalGaussian: variance must be >= 0");
}

DiagonalGaussian DiagonalGaussian::isotropic(std::size_t dim, double mean_value,
                                             double variance_value) {
  return DiagonalGaussian(std::vector<double>(dim, mean_value),
                          std::vector<double>(dim, variance_value));
}

LabeledMixture::LabeledMixture(std::vector<double> marginals, std::vector<DiagonalGaussian> comps)
    : label_marginals(std::move(marginals)), components(std::move(comps)) {
  if (label_marginals.empty()) throw invalid_input_error("LabeledMixture: empty mixture");
  if (label_marginals.size() != components.size())
    throw invalid_input_error("LabeledMixture: marginals and components lengths differ");
  double sum = 0.0;
  for (double p : label_marginals) {
    if (!(p >= 0.0)) throw invalid_input_error("LabeledMixture: negative label marginal");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kMarginalTolerance)
    throw invalid_input_error("LabeledMixture: label marginals sum to " + std::to_string(sum) +
                              ", expected 1 within 1e-12");
  const std::size_t d = components.front().dim();
  for (const auto& c : components)
    if (c.dim() != d) throw invalid_input_error("LabeledMixture: components differ in dimension");
}

LabeledMixture axis_mixture(std::size_t k, std::size_t d, double radius, double sigma) {
  if (k == 0 || d == 0) throw invalid_input_error("axis_mixture: k and d must be >= 1");
  std::vector<DiagonalGaussian> comps;
  comps.reserve(k);
  for (std::size_t y = 0; y < k; ++y) {
    std::vector<double> mean(d, 0.0);
    mean[y % d] = radius;
    comps.emplace_back(std::move(mean), std::vector<double>(d, sigma * sigma));
  }
  // Exact normalization: assign 1/k and absorb the residual in label 0.
  std::vector<double> marginals(k, 1.0 / static_cast<double>(k));
  double sum = 0.0;
  for (double p : marginals) sum += p;
  marginals[0] += 1.0 - sum;
  return LabeledMixture(std::move(marginals), std::move(comps));
}

namespace {

void fill_gaussian(const DiagonalGaussian& g, const RandomStream& stream, std::uint64_t sample_index,
                   std::vector<double>& out) {
  const std::size_t d = g.dim();
  out.resize(d);
  const std::uint64_t base = sample_index * d;
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(g.variance[j]);
    out[j] = g.mean[j] + sd * stream.normal(base + j);
  }
}

}  // namespace

GaussianSampler::GaussianSampler(const DiagonalGaussian& g, std::uint64_t seed)
    : g_(&g), stream_(seed, "gaussian_x") {
  if (g.dim() == 0) throw invalid_input_error("sample_gaussian: dimension-zero Gaussian");
}

void GaussianSampler::draw(std::uint64_t i, std::vector<double>& out) const {
  fill_gaussian(*g_, stream_, i, out);
}

MixtureSampler::MixtureSampler(const LabeledMixture& m, std::uint64_t seed)
    : m_(&m), labels_(seed, "mixture_label"), xs_(seed, "mixture_x") {
  if (m.num_labels() == 0) throw invalid_input_error("sample_mixture: empty mixture");
}

std::size_t MixtureSampler::draw_label(std::uint64_t i) const {
  const double u = labels_.uniform01(i);
  double cum = 0.0;
  std::size_t y = 0;
  for (std::size_t j = 0; j < m_->num_labels(); ++j) {
    cum += m_->label_marginals[j];
    y = j;
    if (u < cum) break;  // falls through to the last label on rounding slack
  }
  return y;
}

void MixtureSampler::draw(std::uint64_t i, Sample& out) const {
  out.y = draw_label(i);
  fill_gaussian(m_->components[out.y], xs_, i, out.x);
}

std::vector<std::vector<double>> sample_gaussian(const DiagonalGaussian& g, std::size_t n,
                                                 std::uint64_t seed) {
  if (n == 0) throw invalid_input_error("sample_gaussian: n must be >= 1");
  GaussianSampler sampler(g, seed);
  std::vector<std::vector<double>> out(n);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sampler.draw(i, out[i]);
  });
  return out;
}

std::vector<Sample> sample_mixture(const LabeledMixture& m, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw invalid_input_error("sample_mixture: n must be >= 1");
  MixtureSampler sampler(m, seed);
  std::vector<Sample> out(n);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) sampler.draw(i, out[i]);
  });
  return out;
}

double kl_diag_gaussian(const DiagonalGaussian& q, const DiagonalGaussian& p) {
  if (q.dim() != p.dim()) throw invalid_input_error("kl_diag_gaussian: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    const double vq = q.variance[i];
    const double vp = p.variance[i];
    if (!(vp > 0.0)) throw invalid_input_error("kl_diag_gaussian: zero prior variance");
    if (!(vq > 0.0)) throw invalid_input_error("kl_diag_gaussian: zero posterior variance");
    const double dm = q.mean[i] - p.mean[i];
    kl += 0.5 * std::log(vp / vq) + (vq + dm * dm) / (2.0 * vp) - 0.5;
  }
  return kl < 0.0 ? 0.0 : kl;  // clamp tiny negative rounding residue
}

std::vector<LabelStats> empirical_label_stats(std::span<const Sample> data, std::size_t k) {
  if (k == 0) throw invalid_input_error("empirical_label_stats: k must be >= 1");
  if (data.empty()) throw invalid_input_error("empirical_label_stats: empty data");
  const std::size_t d = data.front().x.size();
  std::vector<LabelStats> stats(k);
  for (auto& s : stats) {
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
  }
  for (const auto& sample : data) {
    if (sample.y >= k) throw invalid_input_error("empirical_label_stats: label out of range");
    if (sample.x.size() != d)
      throw invalid_input_error("empirical_label_stats: inconsistent feature count");
    auto& s = stats[sample.y];
    ++s.count;
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += sample.x[j];
  }
  for (std::size_t y = 0; y < k; ++y) {
    if (stats[y].count < 2)
      throw insufficient_data_error("empirical_label_stats: label " + std::to_string(y) +
                                    " has fewer than 2 samples");
    for (std::size_t j = 0; j < d; ++j) stats[y].mean[j] /= static_cast<double>(stats[y].count);
  }
  for (const auto& sample : data) {
    auto& s = stats[sample.y];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = sample.x[j] - s.mean[j];
      s.stddev[j] += diff * diff;
    }
  }
  for (std::size_t y = 0; y < k; ++y) {
    auto& s = stats[y];
    for (std::size_t j = 0; j < d; ++j) {
      const double var = s.stddev[j] / static_cast<double>(s.count - 1);
      const double sd = std::sqrt(var);
      s.stddev[j] = sd < kSigmaFloor ? kSigmaFloor : sd;
    }
  }
  return stats;
}

}  // namespace lsbound
