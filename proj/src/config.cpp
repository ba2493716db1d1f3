#include "lsbound/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsbound/errors.hpp"

namespace lsbound {

namespace {

constexpr std::array kKnownKeys = {
    "seed",
    "out.dir",
    "data.source",
    "data.train_size",
    "data.synthetic.classes",
    "data.synthetic.dim",
    "data.synthetic.radius",
    "data.synthetic.sigma",
    "data.mixture.k",
    "data.mixture.d",
    "data.mixture.marginals",
    "data.idx.images",
    "data.idx.labels",
    "data.csv.path",
    "data.csv.classes",
    "model.arch",
    "model.depth",
    "model.param_budget",
    "model.loss",
    "model.conv.layers",
    "model.conv.channels",
    "model.conv.kernel",
    "model.conv.fc_width",
    "model.input.channels",
    "model.input.height",
    "model.input.width",
    "train.learning_rate",
    "train.momentum",
    "train.batch_size",
    "train.epochs",
    "bound.theorem",
    "bound.lambda",
    "bound.delta",
    "bound.sigma_p2",
    "bound.sigma_q2",
    "bound.sigma_y",
    "bound.b",
    "bound.g",
    "bound.baseline_b",
    "mc.n_prior",
    "mc.n_data",
    "mc.n_posterior",
    "mc.threads",
    "sweep.kind",
    "sweep.lambda_grid",
    "sweep.depths",
    "sweep.sigma_p2_grid",
    "verify.n",
};

constexpr std::array kKnownPrefixes = {
    "data.mixture.mean.",
    "data.mixture.std.",
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw invalid_input_error("config: key '" + key + "' has non-numeric value '" + text + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw invalid_input_error("config: key '" + key + "' has non-integer value '" + text + "'");
  }
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void ConfigMap::check_known(const std::string& key) {
  for (const char* k : kKnownKeys)
    if (key == k) return;
  for (const char* p : kKnownPrefixes)
    if (key.rfind(p, 0) == 0 && key.size() > std::string(p).size()) return;
  throw invalid_input_error("config: unknown key '" + key + "'");
}

void ConfigMap::set(const std::string& key, std::string value) {
  check_known(key);
  values_[key] = std::move(value);
}

ConfigMap ConfigMap::parse_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw invalid_input_error("config: line " + std::to_string(line_no) +
                                " is not key=value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw invalid_input_error("config: empty key at line " + std::to_string(line_no));
    map.set(key, value);
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

void ConfigMap::apply_override(const std::string& item) {
  const std::size_t eq = item.find('=');
  if (eq == std::string::npos)
    throw invalid_input_error("--override expects key=value, got '" + item + "'");
  set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
}

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_int(key, it->second);
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw invalid_input_error("config: key '" + key + "' has non-integer value '" + it->second +
                              "'");
  }
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_commas(get(key, "")))
    if (!item.empty()) out.push_back(parse_double(key, item));
  return out;
}

std::vector<int> ConfigMap::get_int_list(const std::string& key) const {
  std::vector<int> out;
  for (const std::string& item : split_commas(get(key, "")))
    if (!item.empty()) out.push_back(static_cast<int>(parse_int(key, item)));
  return out;
}

std::string ConfigMap::canonical() const {
  std::ostringstream os;
  for (const auto& [key, value] : values_) os << key << "=" << value << "\n";
  return os.str();
}

std::uint64_t ConfigMap::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ConfigMap mixture_to_config(const LabeledMixture& mix) {
  ConfigMap map;
  map.set("data.mixture.k", std::to_string(mix.num_labels()));
  map.set("data.mixture.d", std::to_string(mix.dim()));
  std::string marg;
  for (std::size_t y = 0; y < mix.num_labels(); ++y) {
    if (y) marg += ",";
    marg += format_double(mix.label_marginals[y]);
  }
  map.set("data.mixture.marginals", marg);
  for (std::size_t y = 0; y < mix.num_labels(); ++y) {
    std::string mean, std_;
    for (std::size_t j = 0; j < mix.dim(); ++j) {
      if (j) {
        mean += ",";
        std_ += ",";
      }
      mean += format_double(mix.components[y].mean[j]);
      std_ += format_double(std::sqrt(mix.components[y].variance[j]));
    }
    map.set("data.mixture.mean." + std::to_string(y), mean);
    map.set("data.mixture.std." + std::to_string(y), std_);
  }
  return map;
}

LabeledMixture mixture_from_config(const ConfigMap& map) {
  const std::size_t k = static_cast<std::size_t>(map.get_int("data.mixture.k", 0));
  const std::size_t d = static_cast<std::size_t>(map.get_int("data.mixture.d", 0));
  if (k == 0 || d == 0)
    throw invalid_input_error("config: explicit mixture needs data.mixture.k and data.mixture.d");
  std::vector<double> marginals = map.get_double_list("data.mixture.marginals");
  if (marginals.size() != k)
    throw invalid_input_error("config: data.mixture.marginals must list k values");
  std::vector<DiagonalGaussian> comps;
  comps.reserve(k);
  for (std::size_t y = 0; y < k; ++y) {
    const std::string mean_key = "data.mixture.mean." + std::to_string(y);
    const std::string std_key = "data.mixture.std." + std::to_string(y);
    if (!map.has(mean_key) || !map.has(std_key))
      throw invalid_input_error("config: missing " + mean_key + " or " + std_key);
    std::vector<double> mean = map.get_double_list(mean_key);
    std::vector<double> stds = map.get_double_list(std_key);
    if (mean.size() != d || stds.size() != d)
      throw invalid_input_error("config: mixture component " + std::to_string(y) +
                                " must have d entries");
    std::vector<double> var(d);
    for (std::size_t j = 0; j < d; ++j) var[j] = stds[j] * stds[j];
    comps.emplace_back(std::move(mean), std::move(var));
  }
  return LabeledMixture(std::move(marginals), std::move(comps));
}

const char* to_string(TheoremKind t) {
  switch (t) {
    case TheoremKind::Linear: return "linear";
    case TheoremKind::GlobalOnAverage: return "global_onaverage";
    case TheoremKind::PerW: return "per_w";
    case TheoremKind::BaselineBounded: return "baseline_bounded";
  }
  return "?";
}

double resolve_lambda(const std::string& token, std::size_t m) {
  const double md = static_cast<double>(m);
  if (token == "m") return md;
  if (token == "m/2") return md / 2.0;
  if (token == "m/4") return md / 4.0;
  if (token == "sqrt_m") return std::sqrt(md);
  return parse_double("bound.lambda", token);
}

RunConfig RunConfig::from_map(ConfigMap map) {
  RunConfig cfg;
  cfg.seed = map.get_u64("seed", 0);
  cfg.out_dir = map.get("out.dir", "results");

  const std::string source = map.get("data.source", "synthetic");
  int sources_named = 0;
  if (map.has("data.idx.images") || map.has("data.idx.labels")) ++sources_named;
  if (map.has("data.csv.path")) ++sources_named;
  if (map.has("data.synthetic.classes") || map.has("data.mixture.k")) ++sources_named;
  if (sources_named > 1)
    throw invalid_input_error("config: exactly one data source may be specified");

  if (source == "synthetic") {
    cfg.source = DataSourceKind::Synthetic;
    if (map.has("data.mixture.k")) {
      cfg.mixture = mixture_from_config(map);
    } else {
      const std::size_t k = static_cast<std::size_t>(map.get_int("data.synthetic.classes", 10));
      const std::size_t d = static_cast<std::size_t>(map.get_int("data.synthetic.dim", 16));
      const double radius = map.get_double("data.synthetic.radius", 1.0);
      const double sigma = map.get_double("data.synthetic.sigma", 0.45);
      cfg.mixture = axis_mixture(k, d, radius, sigma);
    }
    cfg.train_size = static_cast<std::size_t>(map.get_int("data.train_size", 1024));
    if (cfg.train_size < 1) throw invalid_input_error("config: data.train_size must be >= 1");
  } else if (source == "idx") {
    cfg.source = DataSourceKind::Idx;
    cfg.idx_images = map.get("data.idx.images", "");
    cfg.idx_labels = map.get("data.idx.labels", "");
    if (cfg.idx_images.empty() || cfg.idx_labels.empty())
      throw invalid_input_error("config: idx source needs data.idx.images and data.idx.labels");
  } else if (source == "csv") {
    cfg.source = DataSourceKind::Csv;
    cfg.csv_path = map.get("data.csv.path", "");
    cfg.csv_classes = static_cast<std::size_t>(map.get_int("data.csv.classes", 0));
    if (cfg.csv_path.empty() || cfg.csv_classes == 0)
      throw invalid_input_error("config: csv source needs data.csv.path and data.csv.classes");
  } else {
    throw invalid_input_error("config: data.source must be synthetic, idx or csv");
  }

  cfg.arch = map.get("model.arch", "mlp");
  if (cfg.arch != "linear" && cfg.arch != "mlp" && cfg.arch != "cnn")
    throw invalid_input_error("config: model.arch must be linear, mlp or cnn");
  cfg.depth = static_cast<int>(map.get_int("model.depth", 3));
  cfg.param_budget = static_cast<std::size_t>(map.get_int("model.param_budget", 0));
  cfg.loss = loss_kind_from_string(map.get("model.loss", "nll"));
  cfg.conv_layers = static_cast<int>(map.get_int("model.conv.layers", 2));
  cfg.conv_channels = static_cast<int>(map.get_int("model.conv.channels", 4));
  cfg.conv_kernel = static_cast<int>(map.get_int("model.conv.kernel", 3));
  cfg.conv_fc_width = static_cast<int>(map.get_int("model.conv.fc_width", 16));
  cfg.input_c = static_cast<int>(map.get_int("model.input.channels", 0));
  cfg.input_h = static_cast<int>(map.get_int("model.input.height", 0));
  cfg.input_w = static_cast<int>(map.get_int("model.input.width", 0));

  cfg.train.learning_rate = map.get_double("train.learning_rate", 0.01);
  cfg.train.momentum = map.get_double("train.momentum", 0.9);
  cfg.train.batch_size = static_cast<std::size_t>(map.get_int("train.batch_size", 128));
  cfg.train.epochs = static_cast<int>(map.get_int("train.epochs", 50));
  cfg.train.seed = cfg.seed;
  cfg.train.loss = cfg.loss;
  cfg.train.validate();

  const std::string theorem = map.get("bound.theorem", "per_w");
  if (theorem == "linear")
    cfg.theorem = TheoremKind::Linear;
  else if (theorem == "global")
    cfg.theorem = TheoremKind::GlobalOnAverage;
  else if (theorem == "per_w")
    cfg.theorem = TheoremKind::PerW;
  else if (theorem == "baseline")
    cfg.theorem = TheoremKind::BaselineBounded;
  else
    throw invalid_input_error("config: bound.theorem must be linear, global, per_w or baseline");

  cfg.lambda_token = map.get("bound.lambda", "m");
  cfg.delta = map.get_double("bound.delta", 0.01);
  cfg.sigma_p2 = map.get_double("bound.sigma_p2", 0.01);
  cfg.sigma_q2 = map.get("bound.sigma_q2", "auto");
  cfg.sigma_y = map.get("bound.sigma_y", "");
  if (map.has("bound.b")) cfg.b = map.get_double("bound.b", 0.0);
  if (map.has("bound.g")) cfg.g = map.get_double("bound.g", 0.0);
  cfg.baseline_b = map.get("bound.baseline_b", "max");
  if (cfg.baseline_b != "max" && cfg.baseline_b != "mean")
    throw invalid_input_error("config: bound.baseline_b must be max or mean");

  cfg.mc.n_prior = static_cast<std::size_t>(map.get_int("mc.n_prior", 64));
  cfg.mc.n_data = static_cast<std::size_t>(map.get_int("mc.n_data", 4096));
  cfg.mc.n_posterior = static_cast<std::size_t>(map.get_int("mc.n_posterior", 32));
  cfg.mc.threads = static_cast<int>(map.get_int("mc.threads", 0));
  cfg.mc.seed = cfg.seed;

  cfg.sweep_kind = map.get("sweep.kind", "figures");
  if (map.has("sweep.lambda_grid")) {
    cfg.lambda_grid.clear();
    for (const std::string& item : split_commas(map.get("sweep.lambda_grid", "")))
      if (!item.empty()) cfg.lambda_grid.push_back(item);
  }
  if (map.has("sweep.depths")) cfg.depths = map.get_int_list("sweep.depths");
  if (map.has("sweep.sigma_p2_grid"))
    cfg.sigma_p2_grid = map.get_double_list("sweep.sigma_p2_grid");
  cfg.verify_n = static_cast<std::size_t>(map.get_int("verify.n", 200000));

  cfg.raw = std::move(map);
  return cfg;
}

double RunConfig::resolved_sigma_q2() const {
  if (sigma_q2 == "auto") return sigma_p2 * 1e-2;
  return parse_double("bound.sigma_q2", sigma_q2);
}

}  // namespace lsbound
