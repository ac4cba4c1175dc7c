#include "smelab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "smelab/csv.hpp"
#include "smelab/errors.hpp"

namespace smelab {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T convert(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_same_v<T, double>) {
      v = std::stod(s, &used);
    } else if constexpr (std::is_same_v<T, int>) {
      v = std::stoi(s, &used);
    } else {
      if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
      v = T(std::stoull(s, &used));
    }
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": invalid value '" + s + "'");
  }
}

template <typename T>
std::vector<T> convert_list(const std::string& key, const std::string& raw) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (trim(cell).empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(convert<T>(key, cell));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
    return std::nullopt;
  }

  template <typename T>
  void scalar(const std::string& key, T& dst) {
    if (auto v = raw(key)) {
      if constexpr (std::is_same_v<T, std::string>) {
        dst = *v;
      } else {
        dst = convert<T>(key, *v);
      }
    }
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& dst) {
    if (auto v = raw(key)) dst = convert_list<T>(key, *v);
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError("'" + section + "': key outside any section");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!seen_.contains(full)) throw ConfigError(full + ": unknown configuration key");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> seen_;
};

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += format_real(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig cfg;
  Reader r(tree);
  std::string kind = "quadratic";
  r.scalar("problem.kind", kind);
  if (kind == "quadratic") {
    cfg.kind = ProblemKind::Quadratic;
  } else if (kind == "sensing") {
    cfg.kind = ProblemKind::Sensing;
  } else {
    throw ConfigError("problem.kind: expected 'quadratic' or 'sensing', got '" + kind + "'");
  }
  r.list("problem.dimension", cfg.dimensions);
  r.scalar("problem.decay", cfg.decay);
  r.scalar("problem.zeta_low", cfg.zeta.low);
  r.scalar("problem.zeta_high", cfg.zeta.high);
  r.scalar("problem.p_high", cfg.zeta.p_high);
  r.list("problem.modes_per_axis", cfg.modes_per_axis);
  r.scalar("problem.grid_points_per_axis", cfg.grid_points_per_axis);
  r.scalar("problem.epsilon", cfg.epsilon);
  r.scalar("problem.target", cfg.target);

  r.list("dynamics.etas", cfg.etas);
  r.scalar("dynamics.horizon", cfg.horizon);
  r.scalar("dynamics.initial", cfg.initial);
  r.list("dynamics.snapshots", cfg.snapshots);

  r.scalar("mc.trials", cfg.trials);
  r.scalar("mc.repeats", cfg.repeats);
  r.scalar("mc.base_seed", cfg.base_seed);
  r.list("mc.ns", cfg.ns);
  r.scalar("mc.guard", cfg.guard);

  r.scalar("output.directory", cfg.directory);
  r.scalar("output.prefix", cfg.prefix);
  r.reject_unknown();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_ini(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[problem]\n";
  out << "kind = " << (cfg.kind == ProblemKind::Quadratic ? "quadratic" : "sensing") << "\n";
  out << "dimension = " << join(cfg.dimensions) << "\n";
  out << "decay = " << format_real(cfg.decay) << "\n";
  out << "zeta_low = " << format_real(cfg.zeta.low) << "\n";
  out << "zeta_high = " << format_real(cfg.zeta.high) << "\n";
  out << "p_high = " << format_real(cfg.zeta.p_high) << "\n";
  out << "modes_per_axis = " << join(cfg.modes_per_axis) << "\n";
  out << "grid_points_per_axis = " << cfg.grid_points_per_axis << "\n";
  out << "epsilon = " << format_real(cfg.epsilon) << "\n";
  out << "target = " << cfg.target << "\n";
  out << "\n[dynamics]\n";
  if (!cfg.etas.empty()) out << "etas = " << join(cfg.etas) << "\n";
  out << "horizon = " << format_real(cfg.horizon) << "\n";
  out << "initial = " << cfg.initial << "\n";
  if (!cfg.snapshots.empty()) out << "snapshots = " << join(cfg.snapshots) << "\n";
  out << "\n[mc]\n";
  out << "trials = " << cfg.trials << "\n";
  out << "repeats = " << cfg.repeats << "\n";
  out << "base_seed = " << cfg.base_seed << "\n";
  if (!cfg.ns.empty()) out << "ns = " << join(cfg.ns) << "\n";
  out << "guard = " << format_real(cfg.guard) << "\n";
  out << "\n[output]\n";
  out << "directory = " << cfg.directory << "\n";
  out << "prefix = " << cfg.prefix << "\n";
  return out.str();
}

void validate(const ExperimentConfig& cfg, bool need_etas) {
  auto positive = [](const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(key + ": must be positive");
  };
  if (cfg.kind == ProblemKind::Quadratic) {
    for (int d : cfg.dimensions)
      if (d < 1) throw ConfigError("problem.dimension: must be positive");
    positive("problem.decay", cfg.decay);
    try {
      cfg.zeta.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("problem.zeta_low/zeta_high/p_high: ") + e.what());
    }
  } else {
    for (int k : cfg.modes_per_axis)
      if (k < 1) throw ConfigError("problem.modes_per_axis: must be positive");
    if (cfg.grid_points_per_axis < 1) throw ConfigError("problem.grid_points_per_axis: must be positive");
    positive("problem.epsilon", cfg.epsilon);
    if (cfg.target != "analytic" && cfg.target.rfind("image:", 0) != 0) {
      throw ConfigError("problem.target: expected 'analytic' or 'image:<path>'");
    }
  }
  if (need_etas && cfg.etas.empty()) throw ConfigError("dynamics.etas: required field is missing");
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
    positive("dynamics.etas", cfg.etas[i]);
    if (i > 0 && !(cfg.etas[i] < cfg.etas[i - 1])) throw ConfigError("dynamics.etas: must be strictly decreasing");
  }
  positive("dynamics.horizon", cfg.horizon);
  if (cfg.initial != "zero" && cfg.initial.rfind("file:", 0) != 0) {
    throw ConfigError("dynamics.initial: expected 'zero' or 'file:<path>'");
  }
  for (double t : cfg.snapshots) positive("dynamics.snapshots", t);
  if (cfg.trials < 2) throw ConfigError("mc.trials: must be at least 2");
  if (cfg.repeats < 1) throw ConfigError("mc.repeats: must be positive");
  for (auto n : cfg.ns)
    if (n < 2) throw ConfigError("mc.ns: every entry must be at least 2");
  positive("mc.guard", cfg.guard);
  if (cfg.prefix.empty()) throw ConfigError("output.prefix: must not be empty");
}

}  // namespace smelab
