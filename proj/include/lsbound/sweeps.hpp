#pragma once

#include <string>
#include <vector>

#include "lsbound/config.hpp"
#include "lsbound/train.hpp"

namespace lsbound {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_csv_table(const CsvTable& table, const std::string& path);

// sigma_p2 x depth tables of mean loss and mean squared input-gradient norm.
struct PriorVarianceSweep {
  CsvTable loss;       // sigma_p2, depth, mean_loss
  CsvTable grad_norm;  // sigma_p2, depth, mean_grad_norm2
};
PriorVarianceSweep prior_variance_sweep(const RunConfig& cfg, const LabeledMixture& dist);

// lambda x depth complexity table (and complexity/lambda).
CsvTable lambda_sweep(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m);

// depth table at lambda = m.
CsvTable depth_sweep(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m);

struct FigureTables {
  std::vector<std::string> paths;
};

// Emits the figure CSVs (prior-variance loss/gradient tables, lambda sweep,
// depth sweep) into out_dir.
FigureTables reproduce_figures(const RunConfig& cfg, const LabeledMixture& dist, std::size_t m,
                               const std::string& out_dir);

}  // namespace lsbound
