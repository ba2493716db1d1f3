#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsbound/bounds.hpp"
#include "lsbound/distributions.hpp"
#include "lsbound/models.hpp"
#include "lsbound/train.hpp"

namespace lsbound {

// Flat key=value configuration with '#' comments and section-prefixed keys
// (data., model., train., bound., mc., sweep., verify., out.). Unknown keys
// are hard errors.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_text(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, std::string value);
  // "key=value" as passed to --override; the key must be known.
  void apply_override(const std::string& item);

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Sorted key=value lines; the config hash is FNV-1a 64 over this text, so
  // it is stable under reordering of the file.
  std::string canonical() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static void check_known(const std::string& key);
  std::map<std::string, std::string> values_;
};

ConfigMap mixture_to_config(const LabeledMixture& mix);
LabeledMixture mixture_from_config(const ConfigMap& map);

enum class DataSourceKind { Synthetic, Idx, Csv };
enum class TheoremKind { Linear, GlobalOnAverage, PerW, BaselineBounded };

const char* to_string(TheoremKind t);

// "m", "m/2", "m/4", "sqrt_m", or a number.
double resolve_lambda(const std::string& token, std::size_t m);

struct RunConfig {
  ConfigMap raw;
  std::uint64_t seed = 0;
  std::string out_dir = "results";

  DataSourceKind source = DataSourceKind::Synthetic;
  std::size_t train_size = 1024;
  std::optional<LabeledMixture> mixture;  // synthetic source only
  std::string idx_images, idx_labels;
  std::string csv_path;
  std::size_t csv_classes = 0;

  std::string arch = "mlp";  // linear | mlp | cnn
  int depth = 3;
  std::size_t param_budget = 0;  // 0 = match the linear model
  LossKind loss = LossKind::Nll;
  int conv_layers = 2, conv_channels = 4, conv_kernel = 3, conv_fc_width = 16;
  int input_c = 0, input_h = 0, input_w = 0;  // spatial override for cnn

  TrainConfig train;

  TheoremKind theorem = TheoremKind::PerW;
  std::string lambda_token = "m";
  double delta = 0.01;
  double sigma_p2 = 0.01;
  std::string sigma_q2 = "auto";  // auto = sigma_p2 * 1e-2
  std::string sigma_y = "";       // "" = mixture (synthetic) or estimated (files); else scalar
  std::optional<double> b, g;     // global theorem inputs
  std::string baseline_b = "max";  // max | mean

  McSettings mc;

  std::string sweep_kind = "figures";
  std::vector<std::string> lambda_grid = {"sqrt_m", "m/4", "m/2", "m"};
  std::vector<int> depths = {1, 2, 3};
  std::vector<double> sigma_p2_grid = {1e-4, 1e-3, 1e-2, 1e-1};

  std::size_t verify_n = 200000;

  static RunConfig from_map(ConfigMap map);
  double resolved_sigma_q2() const;
};

}  // namespace lsbound
