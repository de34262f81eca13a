#include "gpgd/experiment_config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gpgd/dataset.hpp"
#include "gpgd/detail/bytes.hpp"
#include "gpgd/io.hpp"

namespace gpgd {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

template <class T, class F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F item) {
  std::vector<T> out;
  for (const auto& cell : split_csv_line(v)) {
    const auto t = trim(cell);
    if (t.empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(item(key, t));
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt(xs[i]);
  }
  return out;
}

ProblemKind parse_problem(const std::string& v) {
  if (v == "inpainting") return ProblemKind::Inpainting;
  if (v == "superres") return ProblemKind::SuperRes;
  if (v == "deblur") return ProblemKind::Deblur;
  if (v == "sparse") return ProblemKind::Sparse;
  throw ConfigError("problem: unknown kind '" + v + "' (inpainting, superres, deblur, sparse)");
}

DatasetSource parse_source(const std::string& v) {
  if (v == "synthetic") return DatasetSource::Synthetic;
  if (v == "idx") return DatasetSource::Idx;
  if (v == "csv") return DatasetSource::Csv;
  throw ConfigError("dataset.source: unknown source '" + v + "' (synthetic, idx, csv)");
}

TrainMode parse_mode(const std::string& v) {
  if (v == "ae") return TrainMode::AE;
  if (v == "pnp") return TrainMode::PnP;
  throw ConfigError("net.mode: expected ae or pnp, got '" + v + "'");
}

std::string mode_name(TrainMode m) { return m == TrainMode::AE ? "ae" : "pnp"; }

void apply_gpgd_json(GpgdSpec& g, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gpgd: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("gpgd: expected a JSON object");
  for (const auto& [key, val] : j.items()) {
    try {
      if (key == "gamma") {
        g.gamma = val.is_null() ? std::nullopt : std::optional<double>(val.get<double>());
      } else if (key == "max_iters") {
        g.max_iters = val.get<std::size_t>();
      } else if (key == "stagnation_tol") {
        g.stagnation_tol = val.is_null() ? std::nullopt : std::optional<double>(val.get<double>());
      } else {
        throw ConfigError("gpgd: unknown field '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("gpgd." + key + ": " + e.what());
    }
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"profile", [](ExperimentConfig& c, auto&, auto& v) { c.profile = parse_profile(v); }},
      {"problem", [](ExperimentConfig& c, auto&, auto& v) { c.problem.kind = parse_problem(v); }},
      {"problem.ratio", [](ExperimentConfig& c, auto& k, auto& v) { c.problem.ratio = parse_real(k, v); }},
      {"problem.factor", [](ExperimentConfig& c, auto& k, auto& v) { c.problem.factor = parse_uint(k, v); }},
      {"problem.kernel_size",
       [](ExperimentConfig& c, auto& k, auto& v) { c.problem.kernel_size = static_cast<int>(parse_uint(k, v)); }},
      {"problem.kernel_sigma", [](ExperimentConfig& c, auto& k, auto& v) { c.problem.kernel_sigma = parse_real(k, v); }},
      {"problem.k", [](ExperimentConfig& c, auto& k, auto& v) { c.problem.k = parse_uint(k, v); }},
      {"problem.m", [](ExperimentConfig& c, auto& k, auto& v) { c.problem.m = parse_uint(k, v); }},
      {"noise.sigma", [](ExperimentConfig& c, auto& k, auto& v) { c.noise_sigma = parse_real(k, v); }},
      {"lambdas", [](ExperimentConfig& c, auto& k, auto& v) { c.lambdas = parse_list<double>(k, v, parse_real); }},
      {"seeds", [](ExperimentConfig& c, auto& k, auto& v) { c.seeds = parse_list<std::uint64_t>(k, v, parse_uint); }},
      {"dataset.source", [](ExperimentConfig& c, auto&, auto& v) { c.dataset.source = parse_source(v); }},
      {"dataset.name", [](ExperimentConfig& c, auto&, auto& v) { c.dataset.name = v; }},
      {"dataset.path", [](ExperimentConfig& c, auto&, auto& v) { c.dataset.path = v; }},
      {"dataset.height", [](ExperimentConfig& c, auto& k, auto& v) { c.dataset.shape.height = parse_uint(k, v); }},
      {"dataset.width", [](ExperimentConfig& c, auto& k, auto& v) { c.dataset.shape.width = parse_uint(k, v); }},
      {"dataset.count", [](ExperimentConfig& c, auto& k, auto& v) { c.dataset.count = parse_uint(k, v); }},
      {"dataset.test_count", [](ExperimentConfig& c, auto& k, auto& v) { c.dataset.test_count = parse_uint(k, v); }},
      {"dataset.seed", [](ExperimentConfig& c, auto& k, auto& v) { c.dataset.seed = parse_uint(k, v); }},
      {"net.dims",
       [](ExperimentConfig& c, auto& k, auto& v) {
         const auto xs = parse_list<std::uint64_t>(k, v, parse_uint);
         c.net.dims.assign(xs.begin(), xs.end());
       }},
      {"net.slope", [](ExperimentConfig& c, auto& k, auto& v) { c.net.slope = parse_real(k, v); }},
      {"net.mode", [](ExperimentConfig& c, auto&, auto& v) { c.net.mode = parse_mode(v); }},
      {"net.xi", [](ExperimentConfig& c, auto& k, auto& v) { c.net.xi = parse_real(k, v); }},
      {"net.epochs", [](ExperimentConfig& c, auto& k, auto& v) { c.net.epochs = parse_uint(k, v); }},
      {"net.batch_size", [](ExperimentConfig& c, auto& k, auto& v) { c.net.batch_size = parse_uint(k, v); }},
      {"net.tau", [](ExperimentConfig& c, auto& k, auto& v) { c.net.tau = parse_real(k, v); }},
      {"net.tau_final_fraction",
       [](ExperimentConfig& c, auto& k, auto& v) { c.net.tau_final_fraction = parse_real(k, v); }},
      {"gpgd", [](ExperimentConfig& c, auto&, auto& v) { apply_gpgd_json(c.gpgd, v); }},
      {"gpgd.gamma",
       [](ExperimentConfig& c, auto& k, auto& v) {
         c.gpgd.gamma = v == "auto" ? std::nullopt : std::optional<double>(parse_real(k, v));
       }},
      {"gpgd.max_iters", [](ExperimentConfig& c, auto& k, auto& v) { c.gpgd.max_iters = parse_uint(k, v); }},
      {"gpgd.stagnation_tol",
       [](ExperimentConfig& c, auto& k, auto& v) {
         c.gpgd.stagnation_tol = v == "off" ? std::nullopt : std::optional<double>(parse_real(k, v));
       }},
      {"threshold", [](ExperimentConfig& c, auto& k, auto& v) { c.threshold = parse_real(k, v); }},
      {"train_inline", [](ExperimentConfig& c, auto& k, auto& v) { c.train_inline = parse_bool(k, v); }},
      {"out", [](ExperimentConfig& c, auto&, auto& v) { c.out = v; }},
  };
  return table;
}

struct Entry {
  std::string key;
  std::string value;
  std::string where;
};

void parse_lines(const std::string& text, const std::string& origin, std::vector<Entry>& out) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value, got '" + t + "'");
    out.push_back({trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)),
                   origin + ":" + std::to_string(lineno)});
  }
}

}  // namespace

std::string to_string(Profile p) { return p == Profile::Desk ? "desk" : "mnist"; }

Profile parse_profile(const std::string& s) {
  if (s == "desk") return Profile::Desk;
  if (s == "mnist") return Profile::Mnist;
  throw ConfigError("profile: expected desk or mnist, got '" + s + "'");
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Inpainting: return "inpainting";
    case ProblemKind::SuperRes: return "superres";
    case ProblemKind::Deblur: return "deblur";
    case ProblemKind::Sparse: return "sparse";
  }
  return "?";
}

std::string to_string(DatasetSource s) {
  switch (s) {
    case DatasetSource::Synthetic: return "synthetic";
    case DatasetSource::Idx: return "idx";
    case DatasetSource::Csv: return "csv";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::defaults(Profile profile) {
  ExperimentConfig c;
  c.profile = profile;
  if (profile == Profile::Mnist) {
    c.dataset.source = DatasetSource::Idx;
    c.dataset.path = "data/train-images-idx3-ubyte";
    c.dataset.shape = {28, 28};
    c.dataset.count = 10000;
    c.net.dims = {784, 256, 64, 256, 784};
    c.net.epochs = 30;
    c.net.tau = 1e-3;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (lambdas.empty()) throw ConfigError("lambdas: at least one value is required");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ConfigError("lambdas: values must be >= 0");
  if (!(problem.ratio >= 0.0 && problem.ratio < 1.0)) throw ConfigError("problem.ratio: must lie in [0, 1)");
  if (problem.factor < 1) throw ConfigError("problem.factor: must be >= 1");
  if (problem.kernel_size < 1 || problem.kernel_size % 2 == 0)
    throw ConfigError("problem.kernel_size: must be a positive odd integer");
  if (!(problem.kernel_sigma > 0.0)) throw ConfigError("problem.kernel_sigma: must be > 0");
  if (problem.kind == ProblemKind::Sparse && (problem.m < 1 || problem.k < 1))
    throw ConfigError("problem.k, problem.m: must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise.sigma: must be >= 0");
  if (dataset.shape.height < 1 || dataset.shape.width < 1) throw ConfigError("dataset: empty shape");
  if (dataset.count < 1) throw ConfigError("dataset.count: must be >= 1");
  if (dataset.test_count < 1) throw ConfigError("dataset.test_count: must be >= 1");
  if (dataset.source != DatasetSource::Synthetic && dataset.path.empty())
    throw ConfigError("dataset.path: required for source " + to_string(dataset.source));
  if (net.dims.size() < 2) throw ConfigError("net.dims: need at least input and output sizes");
  if (net.dims.front() != dataset.shape.size() || net.dims.back() != dataset.shape.size())
    throw ConfigError("net.dims: input and output must equal the image size " + std::to_string(dataset.shape.size()));
  if (gpgd.gamma && !(*gpgd.gamma > 0.0)) throw ConfigError("gpgd.gamma: must be > 0");
  if (gpgd.max_iters < 1) throw ConfigError("gpgd.max_iters: must be >= 1");
  if (!(threshold > 0.0)) throw ConfigError("threshold: must be > 0");
  try {
    train_config(lambdas.front(), seeds.front()).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("net: ") + e.what());
  }
}

TrainConfig ExperimentConfig::train_config(double lambda, std::uint64_t seed) const {
  TrainConfig t;
  t.lambda = lambda;
  t.tau = net.tau;
  t.tau_final_fraction = net.tau_final_fraction;
  t.batch_size = net.batch_size;
  t.epochs = net.epochs;
  t.mode = net.mode;
  t.xi = net.xi;
  t.seed = seed;
  return t;
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  parse_lines(text, "config", entries);
  for (std::size_t i = 0; i < overrides.size(); ++i) parse_lines(overrides[i], "override " + std::to_string(i + 1), entries);

  Profile profile = Profile::Desk;
  for (const auto& e : entries)
    if (e.key == "profile") profile = parse_profile(e.value);

  auto cfg = ExperimentConfig::defaults(profile);
  const auto& table = setters();
  for (const auto& e : entries) {
    const auto it = table.find(e.key);
    if (it == table.end()) throw ConfigError(e.where + ": unknown key '" + e.key + "'");
    try {
      it->second(cfg, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(e.where + ": " + err.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::string text;
  try {
    text = read_file_bytes(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  return parse_config(text, overrides);
}

std::string print_config(const ExperimentConfig& c) {
  const auto real = [](double v) { return format_double(v); };
  const auto uint = [](std::uint64_t v) { return std::to_string(v); };
  std::ostringstream o;
  o << "profile = " << to_string(c.profile) << '\n';
  o << "problem = " << to_string(c.problem.kind) << '\n';
  o << "problem.ratio = " << real(c.problem.ratio) << '\n';
  o << "problem.factor = " << c.problem.factor << '\n';
  o << "problem.kernel_size = " << c.problem.kernel_size << '\n';
  o << "problem.kernel_sigma = " << real(c.problem.kernel_sigma) << '\n';
  o << "problem.k = " << c.problem.k << '\n';
  o << "problem.m = " << c.problem.m << '\n';
  o << "noise.sigma = " << real(c.noise_sigma) << '\n';
  o << "lambdas = " << join(c.lambdas, real) << '\n';
  o << "seeds = " << join(c.seeds, uint) << '\n';
  o << "dataset.source = " << to_string(c.dataset.source) << '\n';
  o << "dataset.name = " << c.dataset.name << '\n';
  o << "dataset.path = " << c.dataset.path << '\n';
  o << "dataset.height = " << c.dataset.shape.height << '\n';
  o << "dataset.width = " << c.dataset.shape.width << '\n';
  o << "dataset.count = " << c.dataset.count << '\n';
  o << "dataset.test_count = " << c.dataset.test_count << '\n';
  o << "dataset.seed = " << c.dataset.seed << '\n';
  o << "net.dims = " << join(c.net.dims, uint) << '\n';
  o << "net.slope = " << real(c.net.slope) << '\n';
  o << "net.mode = " << mode_name(c.net.mode) << '\n';
  o << "net.xi = " << real(c.net.xi) << '\n';
  o << "net.epochs = " << c.net.epochs << '\n';
  o << "net.batch_size = " << c.net.batch_size << '\n';
  o << "net.tau = " << real(c.net.tau) << '\n';
  o << "net.tau_final_fraction = " << real(c.net.tau_final_fraction) << '\n';
  nlohmann::json g;
  g["gamma"] = c.gpgd.gamma ? nlohmann::json(*c.gpgd.gamma) : nlohmann::json(nullptr);
  g["max_iters"] = c.gpgd.max_iters;
  g["stagnation_tol"] = c.gpgd.stagnation_tol ? nlohmann::json(*c.gpgd.stagnation_tol) : nlohmann::json(nullptr);
  o << "gpgd = " << g.dump() << '\n';
  o << "threshold = " << real(c.threshold) << '\n';
  o << "train_inline = " << (c.train_inline ? "true" : "false") << '\n';
  o << "out = " << c.out.string() << '\n';
  return o.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  auto hashed = cfg;
  hashed.out.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(print_config(hashed))));
  return buf;
}

}  // namespace gpgd
