#include "lsbound/verify.hpp"

#include <cmath>
#include <sstream>

#include "lsbound/bounds.hpp"
#include "lsbound/distributions.hpp"
#include "lsbound/entropy.hpp"
#include "lsbound/models.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

namespace {

LabeledMixture standard_normal_1d() {
  return LabeledMixture({1.0}, {DiagonalGaussian({0.0}, {1.0})});
}

VerifyCheck identity_check(const std::string& name, const McEstimate& lhs, const McEstimate& rhs,
                           double abs_floor) {
  VerifyCheck c;
  c.name = name;
  c.lhs = lhs.value;
  c.rhs = rhs.value;
  c.diff = std::abs(lhs.value - rhs.value);
  const double sigma =
      std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
  c.tol = 3.0 * sigma + abs_floor;
  c.pass = c.diff <= c.tol;
  return c;
}

VerifyCheck inequality_check(const std::string& name, const McEstimate& lhs,
                             const McEstimate& rhs) {
  VerifyCheck c;
  c.name = name;
  c.lhs = lhs.value;
  c.rhs = rhs.value;
  c.diff = lhs.value - rhs.value;
  const double sigma =
      std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
  c.tol = 3.0 * sigma + kIdentityAbsFloor;
  c.pass = lhs.value <= rhs.value + c.tol;
  return c;
}

}  // namespace

std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed, std::size_t n) {
  std::vector<VerifyCheck> checks;
  const LabeledMixture normal = standard_normal_1d();

  // Functional entropy of a constant is exactly zero.
  {
    const McEstimate e = functional_entropy_mc([](const Sample&) { return 1.0; }, normal, n,
                                               derive_seed(seed, "verify", 0));
    VerifyCheck c;
    c.name = "entropy_constant";
    c.lhs = e.value;
    c.rhs = 0.0;
    c.diff = std::abs(e.value);
    c.tol = 1e-15;
    c.pass = c.diff <= c.tol;
    checks.push_back(c);
  }

  // Ent[e^{lambda Z}] = (lambda^2/2) e^{lambda^2/2} for a standard normal.
  {
    const double lambda = 1.0;
    const McEstimate e = functional_entropy_mc(
        [lambda](const Sample& s) { return std::exp(lambda * s.x[0]); }, normal, n,
        derive_seed(seed, "verify", 1));
    const double closed = 0.5 * lambda * lambda * std::exp(0.5 * lambda * lambda);
    VerifyCheck c;
    c.name = "entropy_exp_linear";
    c.lhs = e.value;
    c.rhs = closed;
    c.diff = std::abs(e.value - closed);
    c.tol = 3.0 * e.std_error + kIdentityAbsFloor;
    c.pass = c.diff <= c.tol;
    checks.push_back(c);
  }

  // M(alpha) for a constant loss is exactly e^{-alpha c}.
  {
    const double cval = 0.7;
    const std::vector<double> alphas = {0.0, 0.25, 0.5, 1.0};
    const MgfCurve curve = mgf_curve([cval](const Sample&) { return cval; }, normal, alphas, 1024,
                                     derive_seed(seed, "verify", 2));
    double worst = 0.0;
    for (std::size_t t = 0; t < alphas.size(); ++t)
      worst = std::max(worst, std::abs(curve.values[t] - std::exp(-alphas[t] * cval)));
    VerifyCheck c;
    c.name = "mgf_constant_loss";
    c.lhs = worst;
    c.rhs = 0.0;
    c.diff = worst;
    c.tol = 1e-12;
    c.pass = worst <= c.tol;
    checks.push_back(c);
  }

  // E[e^{-alpha x^2}] = 1/sqrt(1+2 alpha) under N(0,1).
  {
    const double alpha = 0.25;
    const MgfCurve curve =
        mgf_curve([](const Sample& s) { return s.x[0] * s.x[0]; }, normal, std::vector<double>{alpha},
                  n, derive_seed(seed, "verify", 3));
    const double closed = 1.0 / std::sqrt(1.0 + 2.0 * alpha);
    VerifyCheck c;
    c.name = "mgf_gaussian_quadratic";
    c.lhs = curve.values[0];
    c.rhs = closed;
    c.diff = std::abs(curve.values[0] - closed);
    c.tol = 3.0 * curve.std_errors[0] + kIdentityAbsFloor;
    c.pass = c.diff <= c.tol;
    checks.push_back(c);
  }

  // Herbst identity on constant, clipped-linear and quadratic losses.
  {
    const double lambda = 4.0;
    const std::size_t m = 4;
    const std::vector<double> grid = herbst_alpha_grid(lambda / static_cast<double>(m), 64);
    struct Case {
      const char* name;
      SampleFn loss;
      double floor;
    };
    const Case cases[] = {
        {"herbst_identity_constant", [](const Sample&) { return 0.8; }, kIdentityAbsFloor},
        {"herbst_identity_clipped_linear",
         [](const Sample& s) { return std::max(0.0, 1.0 + 0.5 * s.x[0]); }, 1e-3},
        {"herbst_identity_quadratic", [](const Sample& s) { return s.x[0] * s.x[0]; }, 1e-3},
    };
    int idx = 4;
    for (const Case& cs : cases) {
      const std::uint64_t s = derive_seed(seed, "verify", idx++);
      const McEstimate lhs = herbst_lhs(cs.loss, normal, lambda, m, n, s);
      const HerbstRhs rhs = herbst_rhs(cs.loss, normal, lambda, m, grid, n, s);
      checks.push_back(identity_check(cs.name, lhs, rhs.estimate, cs.floor));
    }
  }

  // Gaussian LSI: equality for linear f, strict inequality for z^2/4.
  {
    const DiagonalGaussian g({0.0}, {1.0});
    const double lambda = 1.0;
    const LsiGap tight = gaussian_lsi_gap(
        [lambda](std::span<const double> z) { return lambda * z[0]; },
        [lambda](std::span<const double>) { return std::vector<double>{lambda}; }, g, n,
        derive_seed(seed, "verify", 7));
    VerifyCheck c = identity_check("lsi_linear_tight", tight.lhs, tight.rhs, kIdentityAbsFloor);
    const double closed = 0.5 * lambda * lambda * std::exp(0.5 * lambda * lambda);
    if (std::abs(tight.lhs.value - closed) > 3.0 * tight.lhs.std_error + kIdentityAbsFloor)
      c.pass = false;
    std::ostringstream os;
    os << "closed form " << closed;
    c.details = os.str();
    checks.push_back(c);

    const LsiGap strict = gaussian_lsi_gap(
        [](std::span<const double> z) { return 0.25 * z[0] * z[0]; },
        [](std::span<const double> z) { return std::vector<double>{0.5 * z[0]}; }, g, n,
        derive_seed(seed, "verify", 8));
    VerifyCheck sc = inequality_check("lsi_quadratic_strict", strict.lhs, strict.rhs);
    std::ostringstream so;
    so << "gap " << strict.rhs.value - strict.lhs.value;
    sc.details = so.str();
    checks.push_back(sc);
  }

  // Rademacher LSI by exhaustive enumeration, random functions per dimension.
  {
    for (std::size_t d : {std::size_t{1}, std::size_t{4}, std::size_t{8}}) {
      RandomStream coeffs(seed, "verify_rademacher", d);
      bool all_hold = true;
      double worst = 0.0;
      for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> a(d), b(d);
        for (std::size_t j = 0; j < d; ++j) {
          a[j] = 2.0 * coeffs.uniform01(2 * (trial * d + j)) - 1.0;
          b[j] = 2.0 * coeffs.uniform01(2 * (trial * d + j) + 1) - 1.0;
        }
        const ExactGap gap = rademacher_lsi_gap(
            [&](std::span<const double> z) {
              double v = 0.0;
              for (std::size_t j = 0; j < d; ++j) v += a[j] * z[j] + b[j] * z[j] * z[(j + 1) % d];
              return v;
            },
            d);
        worst = std::max(worst, gap.lhs - gap.rhs);
        if (gap.lhs > gap.rhs + 1e-12) all_hold = false;
      }
      VerifyCheck c;
      c.name = "rademacher_lsi_d" + std::to_string(d);
      c.lhs = worst;
      c.rhs = 0.0;
      c.diff = worst;
      c.tol = 1e-12;
      c.pass = all_hold;
      c.details = "25 random functions";
      checks.push_back(c);
    }
  }

  // Entropy decomposition: exact for point masses, 3-sigma for Gaussians.
  {
    std::vector<DiagonalGaussian> atoms;
    for (int y = 0; y < 3; ++y)
      atoms.push_back(DiagonalGaussian({static_cast<double>(y), -0.5 * y}, {0.0, 0.0}));
    const LabeledMixture point_mix({0.2, 0.3, 0.5}, atoms);
    const EntropyDecomposition pd = entropy_decomposition_check(
        [](const Sample& s) { return 0.3 + s.x[0] * s.x[0] + 0.1 * s.y; }, point_mix, 8,
        derive_seed(seed, "verify", 9));
    VerifyCheck c;
    c.name = "decomposition_pointmass";
    c.lhs = pd.total.value;
    c.rhs = pd.within_sum.value + pd.between.value;
    c.diff = std::abs(c.lhs - c.rhs);
    c.tol = 1e-12;
    c.pass = pd.exact && c.diff <= c.tol;
    checks.push_back(c);

    std::vector<DiagonalGaussian> comps;
    comps.push_back(DiagonalGaussian({0.0, 0.0}, {1.0, 0.5}));
    comps.push_back(DiagonalGaussian({1.0, -1.0}, {0.5, 1.0}));
    comps.push_back(DiagonalGaussian({-1.0, 0.5}, {0.7, 0.7}));
    const LabeledMixture gauss_mix({0.3, 0.3, 0.4}, comps);
    const EntropyDecomposition gd = entropy_decomposition_check(
        [](const Sample& s) { return std::exp(-0.25 * (s.x[0] * s.x[0] + s.x[1] * s.x[1])); },
        gauss_mix, n / 4 + 3, derive_seed(seed, "verify", 10));
    McEstimate sum = gd.within_sum;
    sum.value += gd.between.value;
    sum.std_error = std::sqrt(gd.within_sum.std_error * gd.within_sum.std_error +
                              gd.between.std_error * gd.between.std_error);
    checks.push_back(identity_check("decomposition_gaussian", gd.total, sum, kIdentityAbsFloor));
  }

  // Gaussian quadratic MGF: closed form vs Monte Carlo.
  {
    RandomStream pick(seed, "verify_mgf_pairs");
    bool all_pass = true;
    double worst_ratio = 0.0;
    for (int trial = 0; trial < 4; ++trial) {
      const double t = 0.05 + 0.6 * pick.uniform01(2 * trial);        // 2 c sigma2
      const double sigma2 = 0.25 + pick.uniform01(2 * trial + 1);     // sigma_p^2
      const double cval = t / (2.0 * sigma2);
      const std::size_t dims = 1 + trial % 3;
      const double closed = gaussian_quadratic_mgf(cval, sigma2, dims);
      const McEstimate mc =
          gaussian_quadratic_mgf_mc(cval, sigma2, dims, n, derive_seed(seed, "verify", 11 + trial));
      const double diff = std::abs(mc.value - closed);
      const double tol = 3.0 * mc.std_error + kIdentityAbsFloor;
      if (diff > tol) all_pass = false;
      if (tol > 0.0) worst_ratio = std::max(worst_ratio, diff / tol);
    }
    VerifyCheck c;
    c.name = "gaussian_quadratic_mgf_mc";
    c.lhs = worst_ratio;
    c.rhs = 1.0;
    c.diff = worst_ratio;
    c.tol = 1.0;
    c.pass = all_pass;
    c.details = "worst |diff|/tol over 4 pairs";
    checks.push_back(c);
  }

  // Balance statistic on a label-symmetric mixture under a symmetric prior:
  // reported, not gated.
  {
    const LabeledMixture mix = axis_mixture(4, 8, 1.0, 0.5);
    const Network arch = make_mlp(8, 4, 2);
    McSettings mc;
    mc.seed = derive_seed(seed, "verify", 20);
    mc.n_prior = 16;
    mc.n_data = 2048;
    const BalanceStats st = prior_balance_stats(
        arch, LossKind::Nll, DiagonalGaussian::isotropic(arch.weight_count(), 0.0, 0.01), mix, mc);
    VerifyCheck c;
    c.name = "balance_spread";
    c.informational = true;
    c.lhs = st.across_label_std;
    c.rhs = st.overall_mean;
    c.diff = st.overall_mean > 0.0 ? st.across_label_std / st.overall_mean : 0.0;
    c.tol = 0.0;
    c.pass = true;
    c.details = "across-label std over mean loss";
    checks.push_back(c);
  }

  return checks;
}

}  // namespace lsbound
