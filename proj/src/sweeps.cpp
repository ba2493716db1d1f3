#include "lsbound/sweeps.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lsbound/errors.hpp"
#include "lsbound/rng.hpp"

namespace lsbound {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_csv_table(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw format_error("csv table: cannot open " + path + " for writing");
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ",";
    out << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw invalid_input_error("csv table: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      out << row[i];
    }
    out << "\n";
  }
  if (!out) throw format_error("csv table: write failed for " + path);
}

PriorVarianceSweep prior_variance_sweep(const RunConfig& cfg, const LabeledMixture& dist) {
  PriorVarianceSweep sweep;
  sweep.loss.header = {"sigma_p2", "depth", "mean_loss"};
  sweep.grad_norm.header = {"sigma_p2", "depth", "mean_grad_norm2"};
  const std::size_t d = dist.dim();
  const std::size_t k = dist.num_labels();
  for (int depth : cfg.depths) {
    const Network arch = make_mlp(d, k, depth, cfg.param_budget);
    McSettings mc = cfg.mc;
    mc.seed = derive_seed(cfg.seed, "prior_sweep", static_cast<std::uint64_t>(depth));
    const std::vector<PriorSweepRow> rows =
        prior_sweep_stats(arch, cfg.sigma_p2_grid, dist, cfg.loss, mc);
    for (const PriorSweepRow& row : rows) {
      sweep.loss.rows.push_back({fmt(row.sigma_p2), std::to_string(depth), fmt(row.mean_loss)});
      sweep.grad_norm.rows.push_back(
          {fmt(row.sigma_p2), std::to_string(depth), fmt(row.mean_grad_norm2)});
    }
  }
  return sweep;
}

CsvTable lambda_sweep(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m) {
  CsvTable table;
  table.header = {"lambda", "depth", "complexity", "complexity_over_lambda"};
  const std::size_t d = dist.dim();
  const std::size_t k = dist.num_labels();
  for (int depth : cfg.depths) {
    const Network arch = make_mlp(d, k, depth, cfg.param_budget);
    const DiagonalGaussian prior =
        DiagonalGaussian::isotropic(arch.weight_count(), 0.0, cfg.sigma_p2);
    for (const std::string& token : cfg.lambda_grid) {
      BoundInput in;
      in.lambda = resolve_lambda(token, m);
      in.m = m;
      in.delta = cfg.delta;
      in.sigma_p2 = cfg.sigma_p2;
      in.sigma_y = SigmaY::from_mixture(dist);
      in.mc = cfg.mc;
      in.mc.seed = derive_seed(cfg.seed, "lambda_sweep", static_cast<std::uint64_t>(depth));
      const PerWComplexity c = per_w_complexity(arch, cfg.loss, prior, dist, in);
      table.rows.push_back({fmt(in.lambda), std::to_string(depth), fmt(c.value),
                            fmt(c.value / in.lambda)});
    }
  }
  return table;
}

CsvTable depth_sweep(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m) {
  CsvTable table;
  table.header = {"depth", "hidden_width", "complexity", "overflow"};
  BoundInput in;
  in.lambda = static_cast<double>(m);
  in.m = m;
  in.delta = cfg.delta;
  in.sigma_p2 = cfg.sigma_p2;
  in.sigma_y = SigmaY::from_mixture(dist);
  in.mc = cfg.mc;
  const DepthSweepResult result =
      depth_sweep_complexity(cfg.depths, dist, cfg.loss, in, cfg.param_budget);
  for (const DepthSweepRow& row : result.rows)
    table.rows.push_back({std::to_string(row.depth), std::to_string(row.hidden_width),
                          fmt(row.complexity), row.overflow ? "1" : "0"});
  return table;
}

FigureTables reproduce_figures(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m,
                               const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw format_error("reproduce_figures: cannot create " + out_dir + ": " + ec.message());
  FigureTables out;
  const PriorVarianceSweep pv = prior_variance_sweep(cfg, dist);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_csv_table(pv.loss, path("fig_prior_loss.csv"));
  out.paths.push_back(path("fig_prior_loss.csv"));
  write_csv_table(pv.grad_norm, path("fig_prior_gradnorm.csv"));
  out.paths.push_back(path("fig_prior_gradnorm.csv"));
  write_csv_table(lambda_sweep(cfg, dist, m), path("fig_lambda_complexity.csv"));
  out.paths.push_back(path("fig_lambda_complexity.csv"));
  write_csv_table(depth_sweep(cfg, dist, m), path("fig_depth_complexity.csv"));
  out.paths.push_back(path("fig_depth_complexity.csv"));
  return out;
}

}  // namespace lsbound
