#include "lsbound/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsbound/bounds.hpp"
#include "lsbound/config.hpp"
#include "lsbound/data_io.hpp"
#include "lsbound/errors.hpp"
#include "lsbound/records.hpp"
#include "lsbound/rng.hpp"
#include "lsbound/sweeps.hpp"
#include "lsbound/train.hpp"
#include "lsbound/verify.hpp"
#include "lsbound/version.hpp"

namespace lsbound {

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string checkpoint;
  std::string format = "csv";
  std::optional<std::size_t> verify_n;
};

RunConfig load_config(const GlobalArgs& args) {
  ConfigMap map =
      args.config_path.empty() ? ConfigMap{} : ConfigMap::parse_file(args.config_path);
  for (const std::string& item : args.overrides) map.apply_override(item);
  if (args.seed) map.set("seed", std::to_string(*args.seed));
  if (!args.out_dir.empty()) map.set("out.dir", args.out_dir);
  return RunConfig::from_map(std::move(map));
}

struct LoadedRun {
  RunConfig cfg;
  std::vector<Sample> train;
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t m = 0;
  double lambda = 0.0;
  SigmaY sigma_y = SigmaY::scalar(1.0);
  std::size_t idx_rows = 0, idx_cols = 0;
};

LoadedRun load_run(const GlobalArgs& args) {
  LoadedRun run{load_config(args), {}, 0, 0, 0, 0.0, SigmaY::scalar(1.0), 0, 0};
  RunConfig& cfg = run.cfg;
  switch (cfg.source) {
    case DataSourceKind::Synthetic: {
      run.train = sample_mixture(*cfg.mixture, cfg.train_size, derive_seed(cfg.seed, "train_data"));
      run.d = cfg.mixture->dim();
      run.k = cfg.mixture->num_labels();
      break;
    }
    case DataSourceKind::Idx: {
      IdxDataset ds = load_idx(cfg.idx_images, cfg.idx_labels);
      run.idx_rows = ds.rows;
      run.idx_cols = ds.cols;
      run.train = std::move(ds.samples);
      run.d = run.train.front().x.size();
      std::size_t kmax = 0;
      for (const Sample& s : run.train) kmax = std::max(kmax, s.y);
      run.k = kmax + 1;
      break;
    }
    case DataSourceKind::Csv: {
      run.train = load_csv(cfg.csv_path, cfg.csv_classes);
      run.d = run.train.front().x.size();
      run.k = cfg.csv_classes;
      break;
    }
  }
  run.m = run.train.size();
  run.lambda = resolve_lambda(cfg.lambda_token, run.m);

  if (!cfg.sigma_y.empty() && cfg.sigma_y != "mixture" && cfg.sigma_y != "estimated") {
    double scalar = 0.0;
    try {
      std::size_t pos = 0;
      scalar = std::stod(cfg.sigma_y, &pos);
      if (pos != cfg.sigma_y.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw invalid_input_error("config: bound.sigma_y must be mixture, estimated or a number");
    }
    run.sigma_y = SigmaY::scalar(scalar);
  } else if (cfg.source == DataSourceKind::Synthetic && cfg.sigma_y != "estimated") {
    run.sigma_y = SigmaY::from_mixture(*cfg.mixture);
  } else {
    run.sigma_y = SigmaY::from_label_stats(empirical_label_stats(run.train, run.k));
  }
  return run;
}

Network build_arch(const LoadedRun& run) {
  const RunConfig& cfg = run.cfg;
  if (cfg.arch == "linear") return make_linear(run.d, run.k);
  if (cfg.arch == "mlp") return make_mlp(run.d, run.k, cfg.depth, cfg.param_budget);
  // cnn; an explicit model.input.* shape wins over the IDX-derived one
  TensorShape input;
  if (cfg.input_c > 0 && cfg.input_h > 0 && cfg.input_w > 0) {
    input = TensorShape::chw(cfg.input_c, cfg.input_h, cfg.input_w);
  } else if (run.idx_rows > 0) {
    input = TensorShape::chw(1, static_cast<int>(run.idx_rows), static_cast<int>(run.idx_cols));
  } else {
    throw invalid_input_error(
        "cnn needs an IDX source or model.input.channels/height/width in the config");
  }
  if (input.size() != run.d)
    throw invalid_input_error("cnn input shape does not match the data dimension");
  return make_cnn(input, run.k, cfg.conv_layers, cfg.conv_channels, cfg.conv_kernel,
                  static_cast<std::size_t>(cfg.conv_fc_width));
}

BoundInput make_bound_input(const LoadedRun& run) {
  BoundInput in;
  in.lambda = run.lambda;
  in.m = run.m;
  in.delta = run.cfg.delta;
  in.sigma_p2 = run.cfg.sigma_p2;
  in.sigma_y = run.sigma_y;
  in.b = run.cfg.b;
  in.g = run.cfg.g;
  in.mc = run.cfg.mc;
  return in;
}

Network trained_center(const LoadedRun& run, const GlobalArgs& args) {
  if (!args.checkpoint.empty()) {
    Network net = load_checkpoint(args.checkpoint);
    if (net.class_count() != run.k || net.input_dim() != run.d)
      throw invalid_input_error("checkpoint shape (" + std::to_string(net.input_dim()) + " -> " +
                                std::to_string(net.class_count()) +
                                ") does not match the data (" + std::to_string(run.d) + " -> " +
                                std::to_string(run.k) + ")");
    return net;
  }
  Network net = build_arch(run);
  init_uniform_fanin(net, derive_seed(run.cfg.seed, "init"));
  sgd_train(net, run.train, run.cfg.train);
  return net;
}

double train_loss_bound(const Network& net, const LoadedRun& run, const std::string& mode) {
  Workspace ws;
  double acc = 0.0, worst = 0.0;
  for (const Sample& s : run.train) {
    const double v = loss(net, s.x, s.y, run.cfg.loss, ws);
    acc += v;
    worst = std::max(worst, v);
  }
  return mode == "mean" ? acc / static_cast<double>(run.train.size()) : worst;
}

struct SharedBoundParts {
  Network center;
  RiskEstimates risks;
  double kl = 0.0;
  DiagonalGaussian posterior;
  DiagonalGaussian prior;

  SharedBoundParts(Network c, RiskEstimates r, double kl_, DiagonalGaussian q, DiagonalGaussian p)
      : center(std::move(c)), risks(r), kl(kl_), posterior(std::move(q)), prior(std::move(p)) {}
};

SharedBoundParts shared_parts(const LoadedRun& run, const GlobalArgs& args) {
  Network center = trained_center(run, args);
  const std::size_t nw = center.weight_count();
  DiagonalGaussian prior = DiagonalGaussian::isotropic(nw, 0.0, run.cfg.sigma_p2);
  std::vector<double> q_mean(center.weights().begin(), center.weights().end());
  DiagonalGaussian posterior(std::move(q_mean),
                             std::vector<double>(nw, run.cfg.resolved_sigma_q2()));
  const double kl = kl_diag_gaussian(posterior, prior);
  RiskEstimates risks;
  if (run.cfg.source == DataSourceKind::Synthetic) {
    risks = expected_risks(center, run.cfg.loss, posterior, run.train, *run.cfg.mixture,
                           run.cfg.mc);
  } else {
    risks = expected_risks_heldout(center, run.cfg.loss, posterior, run.train, run.train,
                                   run.cfg.mc);
  }
  return SharedBoundParts(std::move(center), risks, kl, std::move(posterior), std::move(prior));
}

BoundReport compute_bound(const LoadedRun& run, const SharedBoundParts& parts,
                          TheoremKind theorem) {
  BoundInput in = make_bound_input(run);
  double complexity = 0.0;
  std::string extra;
  switch (theorem) {
    case TheoremKind::Linear: {
      if (run.cfg.arch != "linear")
        throw invalid_input_error("bound.theorem=linear requires model.arch=linear");
      const double g = lipschitz_bound_hat_loss(run.cfg.loss, run.k);
      const double sigma_y_scalar = std::sqrt(in.sigma_y.max_variance());
      const double cap = linear_lambda_max(g, std::sqrt(in.sigma_p2), sigma_y_scalar, in.m);
      if (in.lambda > cap)
        throw constraint_error("lambda " + std::to_string(in.lambda) +
                               " exceeds the linear-model cap " + std::to_string(cap));
      complexity = linear_complexity(run.k, run.d);
      break;
    }
    case TheoremKind::GlobalOnAverage:
      complexity = global_onaverage_complexity(in);
      break;
    case TheoremKind::PerW: {
      const PerWComplexity c =
          per_w_complexity(parts.center, run.cfg.loss, parts.prior, *run.cfg.mixture, in);
      complexity = c.value;
      if (c.overflow) extra = c.diagnostic;
      break;
    }
    case TheoremKind::BaselineBounded: {
      const double B = train_loss_bound(parts.center, run, run.cfg.baseline_b);
      complexity = baseline_bounded_complexity(B, in.lambda, in.m);
      extra = "B(" + run.cfg.baseline_b + ")=" + std::to_string(B);
      break;
    }
  }
  BoundReport report = assemble_bound(parts.risks.train.value, complexity, parts.kl, in,
                                      to_string(theorem));
  report.metadata["arch"] = parts.center.describe();
  report.metadata["lambda_token"] = run.cfg.lambda_token;
  report.metadata["loss"] = to_string(run.cfg.loss);
  if (!extra.empty()) report.metadata["notes"] = extra;
  if (run.cfg.source == DataSourceKind::Synthetic) {
    report.metadata["true_risk_estimate"] = std::to_string(parts.risks.true_risk.value);
    report.metadata["true_risk_se"] = std::to_string(parts.risks.true_risk.std_error);
  }
  return report;
}

void print_bound(const BoundReport& r) {
  std::printf("%s: rhs=%.6g (risk=%.6g complexity=%.6g kl=%.6g log(1/delta)=%.6g lambda=%.6g)%s\n",
              r.theorem.c_str(), r.rhs, r.empirical_risk, r.complexity, r.kl, r.log_inv_delta,
              r.lambda_used, r.flagged ? " [flagged]" : "");
}

int cmd_gen_data(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  if (run.cfg.source != DataSourceKind::Synthetic)
    throw invalid_input_error("gen-data requires a synthetic data source");
  std::error_code ec;
  std::filesystem::create_directories(run.cfg.out_dir, ec);
  if (ec) throw format_error("gen-data: cannot create " + run.cfg.out_dir);
  const std::filesystem::path out(run.cfg.out_dir);

  if (args.format == "csv") {
    const std::string path = (out / "train.csv").string();
    write_csv(run.train, path);
    std::printf("wrote %s (%zu samples)\n", path.c_str(), run.train.size());
  } else if (args.format == "idx") {
    // Quantizes features to bytes; intended for image-like data in [0,1].
    const std::size_t n = run.train.size();
    const std::size_t dpix = run.d;
    std::vector<std::uint8_t> pixels(n * dpix);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<std::uint8_t>(run.train[i].y);
      for (std::size_t j = 0; j < dpix; ++j) {
        const double v = std::clamp(run.train[i].x[j], 0.0, 1.0);
        pixels[i * dpix + j] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
    const std::string ipath = (out / "train-images-idx").string();
    const std::string lpath = (out / "train-labels-idx").string();
    write_idx(pixels, labels, 1, dpix, ipath, lpath);
    std::printf("wrote %s and %s (%zu samples)\n", ipath.c_str(), lpath.c_str(), n);
  } else {
    throw invalid_input_error("gen-data: --format must be csv or idx");
  }

  const ConfigMap mix_cfg = mixture_to_config(*run.cfg.mixture);
  const std::string spec_path = (out / "mixture.cfg").string();
  std::ofstream spec(spec_path, std::ios::trunc);
  spec << mix_cfg.canonical();
  std::printf("wrote %s\n", spec_path.c_str());
  return 0;
}

int cmd_train(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  Network net = build_arch(run);
  init_uniform_fanin(net, derive_seed(run.cfg.seed, "init"));
  const TrainTrace trace = sgd_train(net, run.train, run.cfg.train);

  std::error_code ec;
  std::filesystem::create_directories(run.cfg.out_dir, ec);
  const std::string ckpt = (std::filesystem::path(run.cfg.out_dir) / "model.ckpt").string();
  save_checkpoint(net, ckpt);

  nlohmann::json payload = train_trace_json(trace);
  payload["arch"] = net.describe();
  payload["checkpoint"] = ckpt;
  const ResultRecord record =
      make_record("train-trace", payload, config_hash_hex(run.cfg.raw));
  persist(std::vector<ResultRecord>{record}, run.cfg.out_dir);

  std::printf("trained %s for %d epochs; final loss %.6g; checkpoint %s\n",
              net.describe().c_str(), run.cfg.train.epochs,
              trace.epoch_loss.empty() ? 0.0 : trace.epoch_loss.back(), ckpt.c_str());
  return 0;
}

int cmd_estimate(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  nlohmann::json payload;
  if (!args.checkpoint.empty()) {
    const Network net = load_checkpoint(args.checkpoint);
    Workspace ws;
    std::vector<double> grad;
    double loss_acc = 0.0, grad_acc = 0.0;
    for (const Sample& s : run.train) {
      loss_acc += backprop(net, s.x, s.y, run.cfg.loss, ws, &grad, nullptr);
      for (double v : grad) grad_acc += v * v;
    }
    payload["mean_loss"] = loss_acc / static_cast<double>(run.m);
    payload["mean_grad_norm2"] = grad_acc / static_cast<double>(run.m);
    payload["balance"] = balance_stats_json(per_label_loss_stats(net, run.cfg.loss, run.train));
    payload["weights"] = "checkpoint:" + args.checkpoint;
  } else {
    if (run.cfg.source != DataSourceKind::Synthetic)
      throw invalid_input_error("estimate without --checkpoint requires a synthetic source");
    const Network arch = build_arch(run);
    const std::vector<double> grid = {run.cfg.sigma_p2};
    const std::vector<PriorSweepRow> rows =
        prior_sweep_stats(arch, grid, *run.cfg.mixture, run.cfg.loss, run.cfg.mc);
    payload["sigma_p2"] = rows[0].sigma_p2;
    payload["mean_loss"] = rows[0].mean_loss;
    payload["mean_grad_norm2"] = rows[0].mean_grad_norm2;
    payload["balance"] = balance_stats_json(
        prior_balance_stats(arch, run.cfg.loss,
                            DiagonalGaussian::isotropic(arch.weight_count(), 0.0, run.cfg.sigma_p2),
                            *run.cfg.mixture, run.cfg.mc));
    payload["weights"] = "prior";
  }
  payload["label_stats"] = [&] {
    nlohmann::json j = nlohmann::json::array();
    for (const LabelStats& st : empirical_label_stats(run.train, run.k))
      j.push_back({{"count", st.count}});
    return j;
  }();
  const ResultRecord record = make_record("estimate", payload, config_hash_hex(run.cfg.raw));
  persist(std::vector<ResultRecord>{record}, run.cfg.out_dir);
  std::printf("estimate: mean_loss=%.6g mean_grad_norm2=%.6g\n",
              payload["mean_loss"].get<double>(), payload["mean_grad_norm2"].get<double>());
  return 0;
}

int cmd_bound(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  if (run.cfg.theorem == TheoremKind::PerW && run.cfg.source != DataSourceKind::Synthetic)
    throw invalid_input_error("bound.theorem=per_w requires a synthetic source (needs the mixture)");
  const SharedBoundParts parts = shared_parts(run, args);
  const BoundReport report = compute_bound(run, parts, run.cfg.theorem);
  const ResultRecord record =
      make_record("bound", bound_report_json(report), config_hash_hex(run.cfg.raw));
  persist(std::vector<ResultRecord>{record}, run.cfg.out_dir);
  print_bound(report);
  return 0;
}

int cmd_compare(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  if (run.cfg.source != DataSourceKind::Synthetic)
    throw invalid_input_error("compare requires a synthetic source");
  const SharedBoundParts parts = shared_parts(run, args);
  const BoundReport ours = compute_bound(run, parts, TheoremKind::PerW);
  const BoundReport baseline = compute_bound(run, parts, TheoremKind::BaselineBounded);
  const std::string hash = config_hash_hex(run.cfg.raw);
  const std::vector<ResultRecord> records = {
      make_record("bound", bound_report_json(ours), hash),
      make_record("bound", bound_report_json(baseline), hash)};
  persist(records, run.cfg.out_dir);
  print_bound(ours);
  print_bound(baseline);
  std::printf("ours %s baseline (rhs %.6g vs %.6g)\n",
              ours.rhs < baseline.rhs ? "tighter than" : "NOT tighter than", ours.rhs,
              baseline.rhs);
  return 0;
}

int cmd_sweep(const GlobalArgs& args) {
  const LoadedRun run = load_run(args);
  if (run.cfg.source != DataSourceKind::Synthetic)
    throw invalid_input_error("sweep requires a synthetic source");
  const std::string& kind = run.cfg.sweep_kind;
  std::error_code ec;
  std::filesystem::create_directories(run.cfg.out_dir, ec);
  const auto out_path = [&](const char* name) {
    return (std::filesystem::path(run.cfg.out_dir) / name).string();
  };
  std::vector<std::string> written;
  if (kind == "lambda") {
    write_csv_table(lambda_sweep(run.cfg, *run.cfg.mixture, run.m),
                    out_path("fig_lambda_complexity.csv"));
    written.push_back(out_path("fig_lambda_complexity.csv"));
  } else if (kind == "depth") {
    write_csv_table(depth_sweep(run.cfg, *run.cfg.mixture, run.m),
                    out_path("fig_depth_complexity.csv"));
    written.push_back(out_path("fig_depth_complexity.csv"));
  } else if (kind == "prior_variance") {
    const PriorVarianceSweep pv = prior_variance_sweep(run.cfg, *run.cfg.mixture);
    write_csv_table(pv.loss, out_path("fig_prior_loss.csv"));
    write_csv_table(pv.grad_norm, out_path("fig_prior_gradnorm.csv"));
    written.push_back(out_path("fig_prior_loss.csv"));
    written.push_back(out_path("fig_prior_gradnorm.csv"));
  } else if (kind == "figures") {
    written = reproduce_figures(run.cfg, *run.cfg.mixture, run.m, run.cfg.out_dir).paths;
  } else {
    throw invalid_input_error("sweep.kind must be lambda, depth, prior_variance or figures");
  }
  const std::string hash = config_hash_hex(run.cfg.raw);
  std::vector<ResultRecord> records;
  for (const std::string& path : written)
    records.push_back(make_record("sweep-row", nlohmann::json{{"table", path}}, hash));
  persist(records, run.cfg.out_dir);
  for (const std::string& path : written) std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_verify(const GlobalArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::size_t n = args.verify_n.value_or(cfg.verify_n);
  const std::vector<VerifyCheck> checks = run_verify_suite(cfg.seed, n);
  bool all_pass = true;
  std::vector<ResultRecord> records;
  const std::string hash = config_hash_hex(cfg.raw);
  for (const VerifyCheck& c : checks) {
    nlohmann::json j{{"check", c.name},        {"pass", c.pass}, {"informational", c.informational},
                     {"lhs", c.lhs},           {"rhs", c.rhs},   {"diff", c.diff},
                     {"tol", c.tol},           {"n", n},         {"seed", cfg.seed},
                     {"details", c.details}};
    std::printf("%s\n", j.dump().c_str());
    records.push_back(make_record("verify", j, hash));
    if (!c.pass && !c.informational) all_pass = false;
  }
  if (!args.out_dir.empty() || cfg.raw.has("out.dir")) persist(records, cfg.out_dir);
  return all_pass ? 0 : 3;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"PAC-Bayes bounds with gradient-norm complexity terms"};
  app.set_version_flag("--version", kVersion);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Path to a key=value config file");
  app.add_option("--seed", args.seed, "Override the top-level seed");
  app.add_option("--out", args.out_dir, "Override the output directory");
  app.add_option("--override", args.overrides, "Override a config key (key=value, repeatable)");

  auto* gen = app.add_subcommand("gen-data", "Sample a synthetic mixture dataset");
  gen->add_option("--format", args.format, "csv or idx")->default_str("csv");
  auto* train = app.add_subcommand("train", "Train a model with SGD and save a checkpoint");
  auto* estimate = app.add_subcommand("estimate", "Estimate loss/gradient-norm statistics");
  estimate->add_option("--checkpoint", args.checkpoint, "Evaluate a saved checkpoint");
  auto* bound = app.add_subcommand("bound", "Compute one PAC-Bayes bound report");
  bound->add_option("--checkpoint", args.checkpoint, "Posterior center checkpoint");
  auto* compare = app.add_subcommand("compare", "Our bound vs the bounded-loss baseline");
  compare->add_option("--checkpoint", args.checkpoint, "Posterior center checkpoint");
  auto* sweep = app.add_subcommand("sweep", "Run lambda/depth/prior-variance sweeps");
  auto* verify = app.add_subcommand("verify", "Run the entropy/LSI identity suite");
  verify->add_option("--n", args.verify_n, "Samples per Monte Carlo check");
  for (auto* sub : {gen, train, estimate, bound, compare, sweep, verify}) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n\n%s", e.what(), app.help().c_str());
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(args);
    if (train->parsed()) return cmd_train(args);
    if (estimate->parsed()) return cmd_estimate(args);
    if (bound->parsed()) return cmd_bound(args);
    if (compare->parsed()) return cmd_compare(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (verify->parsed()) return cmd_verify(args);
  } catch (const invalid_input_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace lsbound
