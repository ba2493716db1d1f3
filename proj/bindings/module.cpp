#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsbound/bounds.hpp"
#include "lsbound/config.hpp"
#include "lsbound/distributions.hpp"
#include "lsbound/entropy.hpp"
#include "lsbound/errors.hpp"
#include "lsbound/models.hpp"
#include "lsbound/rng.hpp"
#include "lsbound/train.hpp"
#include "lsbound/verify.hpp"
#include "lsbound/version.hpp"

namespace py = pybind11;
using namespace lsbound;

namespace {

LossKind parse_loss(const std::string& name) { return loss_kind_from_string(name); }

// Python callbacks arrive through pybind11's functional caster, which
// acquires the GIL per invocation (and for copies), so the estimators can
// fan out to worker threads while the binding releases the outer GIL.
using PySampleFn = std::function<double(const std::vector<double>&, std::size_t)>;
using PyVectorFn = std::function<double(const std::vector<double>&)>;
using PyVectorGradFn = std::function<std::vector<double>(const std::vector<double>&)>;

SampleFn wrap_sample_fn(const PySampleFn& f) {
  return [f](const Sample& s) { return f(s.x, s.y); };
}

VectorFn wrap_vector_fn(const PyVectorFn& f) {
  return [f](std::span<const double> z) {
    return f(std::vector<double>(z.begin(), z.end()));
  };
}

VectorGradFn wrap_vector_grad_fn(const PyVectorGradFn& f) {
  return [f](std::span<const double> z) {
    return f(std::vector<double>(z.begin(), z.end()));
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PAC-Bayes bounds driven by functional entropy and log-Sobolev inequalities";
  m.attr("__version__") = kVersion;
  m.attr("rng_name") = kRngName;

  py::register_exception<invalid_input_error>(m, "InvalidInputError", PyExc_ValueError);
  py::register_exception<constraint_error>(m, "ConstraintError", PyExc_RuntimeError);
  py::register_exception<evaluation_error>(m, "EvaluationError", PyExc_RuntimeError);

  py::class_<DiagonalGaussian>(m, "DiagonalGaussian")
      .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("mean"),
           py::arg("variance"))
      .def_static("isotropic", &DiagonalGaussian::isotropic, py::arg("dim"), py::arg("mean"),
                  py::arg("variance"))
      .def_readonly("mean", &DiagonalGaussian::mean)
      .def_readonly("variance", &DiagonalGaussian::variance)
      .def("dim", &DiagonalGaussian::dim);

  py::class_<Sample>(m, "Sample")
      .def(py::init([](std::vector<double> x, std::size_t y) {
             Sample s;
             s.x = std::move(x);
             s.y = y;
             return s;
           }),
           py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Sample::x)
      .def_readwrite("y", &Sample::y);

  py::class_<LabeledMixture>(m, "LabeledMixture")
      .def(py::init<std::vector<double>, std::vector<DiagonalGaussian>>(),
           py::arg("label_marginals"), py::arg("components"))
      .def_readonly("label_marginals", &LabeledMixture::label_marginals)
      .def_readonly("components", &LabeledMixture::components)
      .def("dim", &LabeledMixture::dim)
      .def("num_labels", &LabeledMixture::num_labels);

  m.def("axis_mixture", &axis_mixture, py::arg("k"), py::arg("d"), py::arg("radius"),
        py::arg("sigma"));
  m.def("sample_gaussian", &sample_gaussian, py::arg("gaussian"), py::arg("n"), py::arg("seed"));
  m.def(
      "sample_mixture",
      [](const LabeledMixture& mix, std::size_t n, std::uint64_t seed) {
        std::vector<std::pair<std::vector<double>, std::size_t>> out;
        out.reserve(n);
        for (Sample& s : sample_mixture(mix, n, seed)) out.emplace_back(std::move(s.x), s.y);
        return out;
      },
      py::arg("mixture"), py::arg("n"), py::arg("seed"));
  m.def("kl_diag_gaussian", &kl_diag_gaussian, py::arg("q"), py::arg("p"));
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("name"), py::arg("index") = 0);

  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("value", &McEstimate::value)
      .def_readonly("std_error", &McEstimate::std_error)
      .def_readonly("n_samples", &McEstimate::n_samples)
      .def("__repr__", [](const McEstimate& e) {
        return "McEstimate(value=" + std::to_string(e.value) +
               ", std_error=" + std::to_string(e.std_error) + ")";
      });

  m.def(
      "functional_entropy",
      [](const std::vector<double>& values, const std::vector<double>& weights) {
        return functional_entropy(values, weights);
      },
      py::arg("values"), py::arg("weights"));
  m.def(
      "functional_entropy_mc",
      [](const PySampleFn& f, const LabeledMixture& dist, std::size_t n, std::uint64_t seed) {
        return functional_entropy_mc(wrap_sample_fn(f), dist, n, seed);
      },
      py::arg("f"), py::arg("dist"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<MgfCurve>(m, "MgfCurve")
      .def_readonly("alphas", &MgfCurve::alphas)
      .def_readonly("values", &MgfCurve::values)
      .def_readonly("std_errors", &MgfCurve::std_errors);
  m.def(
      "mgf_curve",
      [](const PySampleFn& loss, const LabeledMixture& dist, const std::vector<double>& alphas,
         std::size_t n, std::uint64_t seed) {
        return mgf_curve(wrap_sample_fn(loss), dist, alphas, n, seed);
      },
      py::arg("loss"), py::arg("dist"), py::arg("alphas"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "herbst_lhs",
      [](const PySampleFn& loss, const LabeledMixture& dist, double lambda, std::size_t mm,
         std::size_t n, std::uint64_t seed) {
        return herbst_lhs(wrap_sample_fn(loss), dist, lambda, mm, n, seed);
      },
      py::arg("loss"), py::arg("dist"), py::arg("lambda_"), py::arg("m"), py::arg("n"),
      py::arg("seed"), py::call_guard<py::gil_scoped_release>());
  m.def("herbst_alpha_grid", &herbst_alpha_grid, py::arg("alpha_max"), py::arg("n_points") = 64);
  py::class_<HerbstRhs>(m, "HerbstRhs")
      .def_readonly("estimate", &HerbstRhs::estimate)
      .def_readonly("grid", &HerbstRhs::grid)
      .def_readonly("integrand", &HerbstRhs::integrand);
  m.def(
      "herbst_rhs",
      [](const PySampleFn& loss, const LabeledMixture& dist, double lambda, std::size_t mm,
         const std::vector<double>& grid, std::size_t n, std::uint64_t seed) {
        return herbst_rhs(wrap_sample_fn(loss), dist, lambda, mm, grid, n, seed);
      },
      py::arg("loss"), py::arg("dist"), py::arg("lambda_"), py::arg("m"), py::arg("alpha_grid"),
      py::arg("n"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());

  py::class_<ExactGap>(m, "ExactGap")
      .def_readonly("lhs", &ExactGap::lhs)
      .def_readonly("rhs", &ExactGap::rhs);
  m.def(
      "rademacher_lsi_gap",
      [](const PyVectorFn& f, std::size_t d) {
        return rademacher_lsi_gap(wrap_vector_fn(f), d);
      },
      py::arg("f"), py::arg("d"), py::call_guard<py::gil_scoped_release>());

  py::class_<LsiGap>(m, "LsiGap")
      .def_readonly("lhs", &LsiGap::lhs)
      .def_readonly("rhs", &LsiGap::rhs);
  m.def(
      "gaussian_lsi_gap",
      [](const PyVectorFn& f, const PyVectorGradFn& grad_f, const DiagonalGaussian& g,
         std::size_t n, std::uint64_t seed) {
        return gaussian_lsi_gap(wrap_vector_fn(f), wrap_vector_grad_fn(grad_f), g, n, seed);
      },
      py::arg("f"), py::arg("grad_f"), py::arg("gaussian"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<EntropyDecomposition>(m, "EntropyDecomposition")
      .def_readonly("total", &EntropyDecomposition::total)
      .def_readonly("within_sum", &EntropyDecomposition::within_sum)
      .def_readonly("between", &EntropyDecomposition::between)
      .def_readonly("exact", &EntropyDecomposition::exact);
  m.def(
      "entropy_decomposition_check",
      [](const PySampleFn& f, const LabeledMixture& mix, std::size_t n, std::uint64_t seed) {
        return entropy_decomposition_check(wrap_sample_fn(f), mix, n, seed);
      },
      py::arg("f"), py::arg("mix"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<Network>(m, "Network")
      .def("describe", &Network::describe)
      .def("weight_count", &Network::weight_count)
      .def("input_dim", &Network::input_dim)
      .def("class_count", &Network::class_count)
      .def("get_weights",
           [](const Network& net) {
             return std::vector<double>(net.weights().begin(), net.weights().end());
           })
      .def("set_weights",
           [](Network& net, const std::vector<double>& w) { net.set_weights(w); });
  m.def("make_linear", &make_linear, py::arg("d"), py::arg("k"));
  m.def("make_mlp", &make_mlp, py::arg("d"), py::arg("k"), py::arg("depth"),
        py::arg("param_budget") = 0);
  m.def(
      "make_cnn",
      [](int c, int h, int w, std::size_t k, int conv_layers, int channels, int kernel,
         std::size_t fc_width) {
        return make_cnn(TensorShape::chw(c, h, w), k, conv_layers, channels, kernel, fc_width);
      },
      py::arg("channels_in"), py::arg("height"), py::arg("width"), py::arg("k"),
      py::arg("conv_layers"), py::arg("channels"), py::arg("kernel"), py::arg("fc_width"));
  m.def("init_uniform_fanin", &init_uniform_fanin, py::arg("net"), py::arg("seed"));
  m.def("init_gaussian", &init_gaussian, py::arg("net"), py::arg("sigma2"), py::arg("seed"));
  m.def(
      "forward",
      [](const Network& net, const std::vector<double>& x) { return forward(net, x); },
      py::arg("net"), py::arg("x"));
  m.def(
      "loss",
      [](const Network& net, const std::vector<double>& x, std::size_t y,
         const std::string& kind) { return loss(net, x, y, parse_loss(kind)); },
      py::arg("net"), py::arg("x"), py::arg("y"), py::arg("kind"));
  m.def(
      "input_gradient",
      [](const Network& net, const std::vector<double>& x, std::size_t y,
         const std::string& kind) { return input_gradient(net, x, y, parse_loss(kind)); },
      py::arg("net"), py::arg("x"), py::arg("y"), py::arg("kind"));
  m.def(
      "weight_gradient",
      [](const Network& net, const std::vector<std::pair<std::vector<double>, std::size_t>>& batch,
         const std::string& kind) {
        std::vector<Sample> samples(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
          samples[i].x = batch[i].first;
          samples[i].y = batch[i].second;
        }
        return weight_gradient(net, samples, parse_loss(kind));
      },
      py::arg("net"), py::arg("batch"), py::arg("kind"));
  m.def(
      "lipschitz_bound_hat_loss",
      [](const std::string& kind, std::size_t k) {
        return lipschitz_bound_hat_loss(parse_loss(kind), k);
      },
      py::arg("kind"), py::arg("k"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("net"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](double lr, double momentum, std::size_t batch_size, int epochs,
                       std::uint64_t seed, const std::string& kind) {
             TrainConfig cfg;
             cfg.learning_rate = lr;
             cfg.momentum = momentum;
             cfg.batch_size = batch_size;
             cfg.epochs = epochs;
             cfg.seed = seed;
             cfg.loss = parse_loss(kind);
             return cfg;
           }),
           py::arg("learning_rate") = 0.01, py::arg("momentum") = 0.9,
           py::arg("batch_size") = 128, py::arg("epochs") = 50, py::arg("seed") = 0,
           py::arg("loss") = "nll");
  py::class_<TrainTrace>(m, "TrainTrace")
      .def_readonly("epoch_loss", &TrainTrace::epoch_loss)
      .def_readonly("final_weights", &TrainTrace::final_weights)
      .def_readonly("wall_seconds", &TrainTrace::wall_seconds)
      .def_readonly("per_label_mean_loss", &TrainTrace::per_label_mean_loss)
      .def_readonly("label_loss_std", &TrainTrace::label_loss_std);
  m.def(
      "sgd_train",
      [](Network& net, const std::vector<std::pair<std::vector<double>, std::size_t>>& data,
         const TrainConfig& cfg) {
        std::vector<Sample> samples(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
          samples[i].x = data[i].first;
          samples[i].y = data[i].second;
        }
        return sgd_train(net, samples, cfg);
      },
      py::arg("net"), py::arg("data"), py::arg("cfg"));

  py::class_<McSettings>(m, "McSettings")
      .def(py::init([](std::size_t n_prior, std::size_t n_data, std::size_t n_posterior,
                       std::uint64_t seed, int threads) {
             return McSettings{n_prior, n_data, n_posterior, seed, threads};
           }),
           py::arg("n_prior") = 64, py::arg("n_data") = 4096, py::arg("n_posterior") = 32,
           py::arg("seed") = 0, py::arg("threads") = 0)
      .def_readwrite("n_prior", &McSettings::n_prior)
      .def_readwrite("n_data", &McSettings::n_data)
      .def_readwrite("n_posterior", &McSettings::n_posterior)
      .def_readwrite("seed", &McSettings::seed);

  py::class_<SigmaY>(m, "SigmaY")
      .def_static("scalar", &SigmaY::scalar, py::arg("value"), py::arg("provenance") = "config")
      .def_static("from_mixture", &SigmaY::from_mixture, py::arg("mixture"))
      .def("max_variance", &SigmaY::max_variance)
      .def_property_readonly("provenance", &SigmaY::provenance);

  py::class_<BoundInput>(m, "BoundInput")
      .def(py::init([](double lambda, std::size_t mm, double delta, double sigma_p2,
                       const SigmaY& sigma_y, std::optional<double> b, std::optional<double> g,
                       const McSettings& mc) {
             BoundInput in;
             in.lambda = lambda;
             in.m = mm;
             in.delta = delta;
             in.sigma_p2 = sigma_p2;
             in.sigma_y = sigma_y;
             in.b = b;
             in.g = g;
             in.mc = mc;
             in.validate();
             return in;
           }),
           py::arg("lambda_"), py::arg("m"), py::arg("delta") = 0.01, py::arg("sigma_p2") = 0.01,
           py::arg("sigma_y") = SigmaY::scalar(1.0), py::arg("b") = std::nullopt,
           py::arg("g") = std::nullopt, py::arg("mc") = McSettings{});

  m.def("linear_lambda_max", &linear_lambda_max, py::arg("g"), py::arg("sigma_p"),
        py::arg("sigma_y"), py::arg("m"));
  m.def("linear_complexity", &linear_complexity, py::arg("k"), py::arg("d"));
  m.def("gaussian_quadratic_mgf", &gaussian_quadratic_mgf, py::arg("c"), py::arg("sigma_p2"),
        py::arg("n_dims"));
  m.def("gaussian_quadratic_mgf_mc", &gaussian_quadratic_mgf_mc, py::arg("c"), py::arg("sigma_p2"),
        py::arg("n_dims"), py::arg("n"), py::arg("seed"));
  m.def("global_onaverage_complexity", &global_onaverage_complexity, py::arg("input"));
  m.def("baseline_bounded_complexity", &baseline_bounded_complexity, py::arg("B"),
        py::arg("lambda_"), py::arg("m"));

  py::class_<PerWComplexity>(m, "PerWComplexity")
      .def_readonly("value", &PerWComplexity::value)
      .def_readonly("b", &PerWComplexity::b)
      .def_readonly("g", &PerWComplexity::g)
      .def_readonly("exponents", &PerWComplexity::exponents)
      .def_readonly("overflow", &PerWComplexity::overflow);
  m.def(
      "per_w_complexity",
      [](const Network& arch, const std::string& kind, const DiagonalGaussian& prior,
         const LabeledMixture& dist, const BoundInput& in) {
        return per_w_complexity(arch, parse_loss(kind), prior, dist, in);
      },
      py::arg("arch"), py::arg("kind"), py::arg("prior"), py::arg("dist"), py::arg("input"));

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("theorem", &BoundReport::theorem)
      .def_readonly("complexity", &BoundReport::complexity)
      .def_readonly("kl", &BoundReport::kl)
      .def_readonly("empirical_risk", &BoundReport::empirical_risk)
      .def_readonly("log_inv_delta", &BoundReport::log_inv_delta)
      .def_readonly("lambda_used", &BoundReport::lambda_used)
      .def_readonly("rhs", &BoundReport::rhs)
      .def_readonly("flagged", &BoundReport::flagged)
      .def_readonly("metadata", &BoundReport::metadata);
  m.def("assemble_bound", &assemble_bound, py::arg("empirical_risk"), py::arg("complexity"),
        py::arg("kl"), py::arg("input"), py::arg("theorem"));

  py::class_<VerifyCheck>(m, "VerifyCheck")
      .def_readonly("name", &VerifyCheck::name)
      .def_readonly("pass_", &VerifyCheck::pass)
      .def_readonly("informational", &VerifyCheck::informational)
      .def_readonly("lhs", &VerifyCheck::lhs)
      .def_readonly("rhs", &VerifyCheck::rhs)
      .def_readonly("diff", &VerifyCheck::diff)
      .def_readonly("tol", &VerifyCheck::tol);
  m.def("run_verify_suite", &run_verify_suite, py::arg("seed"), py::arg("n"),
        py::call_guard<py::gil_scoped_release>());
}
