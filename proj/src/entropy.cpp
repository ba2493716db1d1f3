#include "lsbound/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "lsbound/errors.hpp"
#include "lsbound/parallel.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

namespace {

inline double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

std::string describe_sample(const Sample& s, double value, std::size_t index) {
  std::ostringstream os;
  os << "value " << value << " at sample " << index << " (y=" << s.y << ", x=[";
  const std::size_t shown = std::min<std::size_t>(s.x.size(), 4);
  for (std::size_t j = 0; j < shown; ++j) {
    if (j) os << ",";
    os << s.x[j];
  }
  if (s.x.size() > shown) os << ",...";
  os << "])";
  return os.str();
}

std::vector<double> evaluate_on_mixture(const SampleFn& f, const LabeledMixture& dist,
                                        std::size_t n, std::uint64_t seed, bool require_nonneg,
                                        const char* what) {
  MixtureSampler sampler(dist, seed);
  std::vector<double> values(n);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    Sample s;
    for (std::size_t i = begin; i < end; ++i) {
      sampler.draw(i, s);
      const double v = f(s);
      if (!std::isfinite(v) || (require_nonneg && v < 0.0))
        throw evaluation_error(std::string(what) + ": " + describe_sample(s, v, i));
      values[i] = v;
    }
  });
  return values;
}

struct SumPair {
  double a = 0.0;
  double b = 0.0;
};

SumPair reduce_sums(std::span<const double> values, const std::function<SumPair(double)>& term) {
  return chunked_reduce<SumPair>(
      values.size(),
      [&](std::size_t, std::size_t begin, std::size_t end) {
        SumPair s;
        for (std::size_t i = begin; i < end; ++i) {
          const SumPair t = term(values[i]);
          s.a += t.a;
          s.b += t.b;
        }
        return s;
      },
      SumPair{}, [](SumPair x, SumPair y) { return SumPair{x.a + y.a, x.b + y.b}; });
}

// Jackknife SE from leave-one-out estimates produced by loo(i), centered at
// the plug-in estimate for numerical stability.
template <typename Loo>
double jackknife_se(std::size_t n, double center, Loo&& loo) {
  if (n < 2) return 0.0;
  const SumPair sums = chunked_reduce<SumPair>(
      n,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        SumPair s;
        for (std::size_t i = begin; i < end; ++i) {
          const double d = loo(i) - center;
          s.a += d;
          s.b += d * d;
        }
        return s;
      },
      SumPair{}, [](SumPair x, SumPair y) { return SumPair{x.a + y.a, x.b + y.b}; });
  const double nn = static_cast<double>(n);
  const double ss = sums.b - sums.a * sums.a / nn;
  const double var = (nn - 1.0) / nn * (ss > 0.0 ? ss : 0.0);
  return std::sqrt(var);
}

McEstimate plugin_entropy_uniform(std::span<const double> values) {
  const std::size_t n = values.size();
  const SumPair s = reduce_sums(values, [](double v) { return SumPair{v, xlogx(v)}; });
  const double mean_f = s.a / static_cast<double>(n);
  const double plug = mean_f > 0.0 ? s.b / static_cast<double>(n) - mean_f * std::log(mean_f) : 0.0;
  const double value = plug < 0.0 ? 0.0 : plug;
  const double se = jackknife_se(n, plug, [&](std::size_t i) {
    const double nm1 = static_cast<double>(n - 1);
    const double m = (s.a - values[i]) / nm1;
    return (s.b - xlogx(values[i])) / nm1 - xlogx(m);
  });
  return McEstimate{value, se, n};
}

}  // namespace

double functional_entropy(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size())
    throw invalid_input_error("functional_entropy: values and weights lengths differ");
  if (values.empty()) throw invalid_input_error("functional_entropy: empty input");
  double sum_w = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0))
      throw invalid_input_error("functional_entropy: negative value at index " +
                                std::to_string(i));
    if (!(weights[i] >= 0.0))
      throw invalid_input_error("functional_entropy: negative weight at index " +
                                std::to_string(i));
    sum_w += weights[i];
    s1 += weights[i] * values[i];
    s2 += weights[i] * xlogx(values[i]);
  }
  if (std::abs(sum_w - 1.0) > 1e-9)
    throw invalid_input_error("functional_entropy: weights sum to " + std::to_string(sum_w));
  const double ent = s1 > 0.0 ? s2 - s1 * std::log(s1) : 0.0;
  return ent < 0.0 ? 0.0 : ent;
}

McEstimate mean_estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw invalid_input_error("mean_estimate: empty input");
  const SumPair s = reduce_sums(values, [](double v) { return SumPair{v, 0.0}; });
  const double mean = s.a / static_cast<double>(n);
  if (n == 1) return McEstimate{mean, 0.0, 1};
  const SumPair c = reduce_sums(values, [mean](double v) {
    const double d = v - mean;
    return SumPair{d * d, 0.0};
  });
  const double sd = std::sqrt(c.a / static_cast<double>(n - 1));
  return McEstimate{mean, sd / std::sqrt(static_cast<double>(n)), n};
}

McEstimate functional_entropy_mc(const SampleFn& f, const LabeledMixture& dist, std::size_t n,
                                 std::uint64_t seed) {
  if (n < 2) throw invalid_input_error("functional_entropy_mc: n must be >= 2");
  const std::vector<double> values =
      evaluate_on_mixture(f, dist, n, seed, /*require_nonneg=*/true, "functional_entropy_mc");
  return plugin_entropy_uniform(values);
}

MgfCurve mgf_curve(const SampleFn& loss, const LabeledMixture& dist, std::span<const double> alphas,
                   std::size_t n, std::uint64_t seed) {
  if (alphas.empty()) throw invalid_input_error("mgf_curve: empty alpha grid");
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    if (!(alphas[t] >= 0.0)) throw invalid_input_error("mgf_curve: alphas must be >= 0");
    if (t > 0 && !(alphas[t] > alphas[t - 1]))
      throw invalid_input_error("mgf_curve: alphas must be strictly increasing");
  }
  if (n < 2) throw invalid_input_error("mgf_curve: n must be >= 2");
  const std::vector<double> losses =
      evaluate_on_mixture(loss, dist, n, seed, /*require_nonneg=*/true, "mgf_curve");
  MgfCurve curve;
  curve.alphas.assign(alphas.begin(), alphas.end());
  curve.values.resize(alphas.size());
  curve.std_errors.resize(alphas.size());
  std::vector<double> f(n);
  for (std::size_t t = 0; t < alphas.size(); ++t) {
    const double a = alphas[t];
    chunked_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) f[i] = std::exp(-a * losses[i]);
    });
    const McEstimate est = mean_estimate(f);
    curve.values[t] = est.value;
    curve.std_errors[t] = est.std_error;
  }
  return curve;
}

McEstimate herbst_lhs(const SampleFn& loss, const LabeledMixture& dist, double lambda,
                      std::size_t m, std::size_t n, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw invalid_input_error("herbst_lhs: lambda must be > 0");
  if (m < 1) throw invalid_input_error("herbst_lhs: m must be >= 1");
  if (n < 2) throw invalid_input_error("herbst_lhs: n must be >= 2");
  const double alpha = lambda / static_cast<double>(m);
  const std::vector<double> losses =
      evaluate_on_mixture(loss, dist, n, seed, /*require_nonneg=*/true, "herbst_lhs");
  std::vector<double> f(n);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) f[i] = std::exp(-alpha * losses[i]);
  });
  double sum_l = 0.0, sum_f = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_l += losses[i];
    sum_f += f[i];
  }
  const double nn = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double plug = lambda * sum_l / nn + md * std::log(sum_f / nn);
  const double se = jackknife_se(n, plug, [&](std::size_t i) {
    const double nm1 = nn - 1.0;
    return lambda * (sum_l - losses[i]) / nm1 + md * std::log((sum_f - f[i]) / nm1);
  });
  return McEstimate{plug, se, n};
}

std::vector<double> herbst_alpha_grid(double alpha_max, std::size_t n_points) {
  if (!(alpha_max > 0.0)) throw invalid_input_error("herbst_alpha_grid: alpha_max must be > 0");
  if (n_points < 4) throw invalid_input_error("herbst_alpha_grid: need at least 4 points");
  std::vector<double> grid;
  grid.reserve(n_points);
  grid.push_back(0.0);
  const std::size_t n_geo = (n_points - 1) / 2;
  const std::size_t n_uni = n_points - 1 - n_geo;
  const double knee = alpha_max / 4.0;
  const double lo = alpha_max * 1e-2;
  const double ratio = std::pow(knee / lo, 1.0 / static_cast<double>(n_geo - 1));
  for (std::size_t i = 0; i < n_geo; ++i)
    grid.push_back(lo * std::pow(ratio, static_cast<double>(i)));
  for (std::size_t i = 1; i <= n_uni; ++i)
    grid.push_back(knee + (alpha_max - knee) * static_cast<double>(i) /
                              static_cast<double>(n_uni));
  grid.back() = alpha_max;
  return grid;
}

HerbstRhs herbst_rhs(const SampleFn& loss, const LabeledMixture& dist, double lambda, std::size_t m,
                     std::span<const double> alpha_grid, std::size_t n, std::uint64_t seed) {
  if (!(lambda > 0.0)) throw invalid_input_error("herbst_rhs: lambda must be > 0");
  if (m < 1) throw invalid_input_error("herbst_rhs: m must be >= 1");
  if (alpha_grid.size() < 2)
    throw invalid_input_error("herbst_rhs: quadrature grid needs at least 2 points");
  if (alpha_grid.front() != 0.0)
    throw invalid_input_error("herbst_rhs: grid must start at alpha = 0");
  const double alpha_max = lambda / static_cast<double>(m);
  for (std::size_t t = 1; t < alpha_grid.size(); ++t) {
    if (!(alpha_grid[t] > alpha_grid[t - 1]))
      throw invalid_input_error("herbst_rhs: grid must be strictly increasing");
    if (alpha_grid[t] > alpha_max * (1.0 + 1e-12))
      throw invalid_input_error("herbst_rhs: grid exceeds lambda/m");
  }
  if (alpha_grid.back() < alpha_max * (1.0 - 1e-9))
    throw invalid_input_error("herbst_rhs: grid must cover (0, lambda/m]");
  if (n < 3) throw invalid_input_error("herbst_rhs: n must be >= 3");

  const std::vector<double> losses =
      evaluate_on_mixture(loss, dist, n, seed, /*require_nonneg=*/true, "herbst_rhs");
  const std::size_t T = alpha_grid.size();
  const double nn = static_cast<double>(n);

  // Totals: loss moments plus, per grid point, sums of F and F log F.
  double sum_l = 0.0, sum_l2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_l += losses[i];
    sum_l2 += losses[i] * losses[i];
  }
  struct Totals {
    std::vector<double> a;  // sum of F log F = -alpha * loss * exp(-alpha * loss)
    std::vector<double> b;  // sum of F
  };
  Totals totals = chunked_reduce<Totals>(
      n,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        Totals t{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0)};
        for (std::size_t i = begin; i < end; ++i) {
          const double l = losses[i];
          for (std::size_t tt = 1; tt < T; ++tt) {
            const double e = std::exp(-alpha_grid[tt] * l);
            t.a[tt] += -alpha_grid[tt] * l * e;
            t.b[tt] += e;
          }
        }
        return t;
      },
      Totals{std::vector<double>(T, 0.0), std::vector<double>(T, 0.0)},
      [T](Totals x, Totals y) {
        for (std::size_t tt = 0; tt < T; ++tt) {
          x.a[tt] += y.a[tt];
          x.b[tt] += y.b[tt];
        }
        return x;
      });

  // Trapezoid weights.
  std::vector<double> w(T, 0.0);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const double h = alpha_grid[t + 1] - alpha_grid[t];
    w[t] += 0.5 * h;
    w[t + 1] += 0.5 * h;
  }

  auto integrand_from = [&](double a_sum, double b_sum, double cnt, double alpha) {
    const double mean_b = b_sum / cnt;
    const double ent = a_sum / cnt - xlogx(mean_b);
    return ent / (alpha * alpha * mean_b);
  };

  std::vector<double> integrand(T, 0.0);
  integrand[0] = 0.5 * (sum_l2 - sum_l * sum_l / nn) / (nn - 1.0);  // limit Var(loss)/2
  for (std::size_t t = 1; t < T; ++t)
    integrand[t] = integrand_from(totals.a[t], totals.b[t], nn, alpha_grid[t]);

  double quad = 0.0;
  for (std::size_t t = 0; t < T; ++t) quad += w[t] * integrand[t];
  const double plug = lambda * quad;

  const double se = jackknife_se(n, plug, [&](std::size_t i) {
    const double l = losses[i];
    const double cnt = nn - 1.0;
    const double sl = sum_l - l;
    const double sl2 = sum_l2 - l * l;
    double q = w[0] * 0.5 * (sl2 - sl * sl / cnt) / (cnt - 1.0);
    for (std::size_t t = 1; t < T; ++t) {
      const double e = std::exp(-alpha_grid[t] * l);
      q += w[t] * integrand_from(totals.a[t] + alpha_grid[t] * l * e, totals.b[t] - e, cnt,
                                 alpha_grid[t]);
    }
    return lambda * q;
  });

  HerbstRhs out;
  out.estimate = McEstimate{plug, se, n};
  out.grid.assign(alpha_grid.begin(), alpha_grid.end());
  out.integrand = std::move(integrand);
  return out;
}

namespace {

void spot_check_gradient(const VectorFn& f, const VectorGradFn& grad_f,
                         const GaussianSampler& sampler, std::size_t n_points, std::size_t dim) {
  std::vector<double> z;
  for (std::size_t i = 0; i < n_points; ++i) {
    sampler.draw(i, z);
    const std::vector<double> g = grad_f(z);
    if (g.size() != dim)
      throw invalid_input_error("gaussian_lsi_gap: grad_f dimension mismatch");
    for (std::size_t j = 0; j < dim; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(z[j]));
      const double zj = z[j];
      z[j] = zj + h;
      const double fp = f(z);
      z[j] = zj - h;
      const double fm = f(z);
      z[j] = zj;
      const double num = (fp - fm) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(num), std::abs(g[j])});
      if (std::abs(num - g[j]) > 1e-4 * scale + 1e-6)
        throw invalid_input_error("gaussian_lsi_gap: grad_f disagrees with finite differences");
    }
  }
}

}  // namespace

LsiGap gaussian_lsi_gap(const VectorFn& f, const VectorGradFn& grad_f, const DiagonalGaussian& g,
                        std::size_t n, std::uint64_t seed) {
  if (n < 2) throw invalid_input_error("gaussian_lsi_gap: n must be >= 2");
  GaussianSampler sampler(g, seed);
  const std::size_t d = g.dim();
  spot_check_gradient(f, grad_f, sampler, std::min<std::size_t>(8, n), d);

  std::vector<double> expf(n), weighted(n);
  chunked_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> z;
    for (std::size_t i = begin; i < end; ++i) {
      sampler.draw(i, z);
      const double fi = f(z);
      const double e = std::exp(fi);
      if (!std::isfinite(fi) || !std::isfinite(e))
        throw evaluation_error("gaussian_lsi_gap: non-finite exp(f) at sample " +
                               std::to_string(i));
      const std::vector<double> gr = grad_f(z);
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double s = std::sqrt(g.variance[j]) * gr[j];
        norm2 += s * s;
      }
      if (!std::isfinite(norm2))
        throw evaluation_error("gaussian_lsi_gap: non-finite gradient at sample " +
                               std::to_string(i));
      expf[i] = e;
      weighted[i] = 0.5 * norm2 * e;
    }
  });
  LsiGap gap;
  gap.lhs = plugin_entropy_uniform(expf);
  gap.rhs = mean_estimate(weighted);
  return gap;
}

ExactGap rademacher_lsi_gap(const VectorFn& f, std::size_t d) {
  if (d == 0) throw invalid_input_error("rademacher_lsi_gap: d must be >= 1");
  if (d > 20) throw size_limit_error("rademacher_lsi_gap: d > 20 not supported (2^d enumeration)");
  const std::size_t n = std::size_t{1} << d;
  std::vector<double> fv(n);
  std::vector<double> z(d);
  for (std::size_t mask = 0; mask < n; ++mask) {
    for (std::size_t j = 0; j < d; ++j) z[j] = (mask >> j) & 1u ? 1.0 : -1.0;
    fv[mask] = f(z);
    if (!std::isfinite(fv[mask]))
      throw evaluation_error("rademacher_lsi_gap: non-finite f value");
  }
  const double p = 1.0 / static_cast<double>(n);
  double s1 = 0.0, s2 = 0.0, rhs = 0.0;
  for (std::size_t mask = 0; mask < n; ++mask) {
    const double e = std::exp(fv[mask]);
    if (!std::isfinite(e)) throw evaluation_error("rademacher_lsi_gap: exp(f) overflow");
    s1 += p * e;
    s2 += p * e * fv[mask];  // e^f log e^f = f e^f
    double norm2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = 0.5 * (fv[mask] - fv[mask ^ (std::size_t{1} << j)]);
      norm2 += diff * diff;
    }
    rhs += 0.5 * p * norm2 * e;
  }
  const double lhs = s2 - xlogx(s1);
  return ExactGap{lhs < 0.0 && lhs > -1e-15 ? 0.0 : lhs, rhs};
}

EntropyDecomposition entropy_decomposition_check(const SampleFn& f, const LabeledMixture& mix,
                                                 std::size_t n, std::uint64_t seed) {
  const std::size_t k = mix.num_labels();
  bool all_point_mass = true;
  for (const auto& c : mix.components)
    for (double v : c.variance)
      if (v != 0.0) all_point_mass = false;

  EntropyDecomposition out;
  if (all_point_mass) {
    // One atom per label: within-label entropy is exactly zero and the
    // between term coincides with the total.
    std::vector<double> values(k);
    Sample s;
    for (std::size_t y = 0; y < k; ++y) {
      s.x = mix.components[y].mean;
      s.y = y;
      values[y] = f(s);
      if (!std::isfinite(values[y]) || values[y] < 0.0)
        throw evaluation_error("entropy_decomposition_check: " +
                               describe_sample(s, values[y], y));
    }
    const double ent = functional_entropy(values, mix.label_marginals);
    out.total = McEstimate{ent, 0.0, k};
    out.within_sum = McEstimate{0.0, 0.0, k};
    out.between = McEstimate{ent, 0.0, k};
    out.exact = true;
    return out;
  }

  if (n < 3) throw invalid_input_error("entropy_decomposition_check: n must be >= 3");

  // Per-label pools; the joint route consumes the same pools in order, so the
  // three estimates share their underlying draws.
  std::vector<std::vector<double>> pool_f(k);
  for (std::size_t y = 0; y < k; ++y) {
    GaussianSampler sampler(mix.components[y], derive_seed(seed, "decomp_pool", y));
    pool_f[y].resize(n);
    auto& pf = pool_f[y];
    chunked_for(n, [&](std::size_t begin, std::size_t end) {
      Sample s;
      s.y = y;
      for (std::size_t i = begin; i < end; ++i) {
        sampler.draw(i, s.x);
        const double v = f(s);
        if (!std::isfinite(v) || v < 0.0)
          throw evaluation_error("entropy_decomposition_check: " + describe_sample(s, v, i));
        pf[i] = v;
      }
    });
  }

  // Within: sum_y D_y Ent_{N_y}[f].
  double within = 0.0, within_var = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    const McEstimate e = plugin_entropy_uniform(pool_f[y]);
    within += mix.label_marginals[y] * e.value;
    within_var += mix.label_marginals[y] * mix.label_marginals[y] * e.std_error * e.std_error;
  }
  out.within_sum = McEstimate{within, std::sqrt(within_var), n * k};

  // Between: Ent_{D_y}[g(y)] with g(y) the per-label pool mean.
  std::vector<double> g_mean(k), g_se(k);
  for (std::size_t y = 0; y < k; ++y) {
    const McEstimate e = mean_estimate(pool_f[y]);
    g_mean[y] = e.value;
    g_se[y] = e.std_error;
  }
  const double between = functional_entropy(g_mean, mix.label_marginals);
  double b1 = 0.0;
  for (std::size_t y = 0; y < k; ++y) b1 += mix.label_marginals[y] * g_mean[y];
  double between_var = 0.0;
  for (std::size_t y = 0; y < k; ++y) {
    if (g_mean[y] <= 0.0 || b1 <= 0.0) continue;
    const double dv = mix.label_marginals[y] * std::log(g_mean[y] / b1);
    between_var += dv * dv * g_se[y] * g_se[y];
  }
  out.between = McEstimate{between, std::sqrt(between_var), n * k};

  // Total: labels drawn from the marginals, x taken from the label's pool.
  MixtureSampler label_source(mix, derive_seed(seed, "decomp_joint"));
  std::vector<double> joint(n);
  std::vector<std::size_t> cursor(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = label_source.draw_label(i);
    joint[i] = pool_f[y][cursor[y]++];
  }
  out.total = plugin_entropy_uniform(joint);
  out.exact = false;
  return out;
}

}  // namespace lsbound
