#pragma once

// Experiment configuration: an INI file with [problem], [dynamics], [mc] and
// [output] sections. List values are comma separated.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smelab/quadratic.hpp"

namespace smelab {

enum class ProblemKind { Quadratic, Sensing };

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::Quadratic;

  // quadratic
  std::vector<int> dimensions{10};
  double decay = 0.8;
  ZetaLaw zeta;

  // sensing
  std::vector<int> modes_per_axis{2};
  int grid_points_per_axis = 10;
  double epsilon = 0.1;
  /// "analytic" or "image:<path>".
  std::string target = "analytic";

  // dynamics
  std::vector<double> etas;
  double horizon = 1.0;
  /// "zero" or "file:<path>".
  std::string initial = "zero";
  std::vector<double> snapshots;

  // mc
  std::size_t trials = 100000;
  std::size_t repeats = 1;
  std::uint64_t base_seed = 1;
  std::vector<std::size_t> ns;
  double guard = 3.0;

  // output
  std::string directory = ".";
  std::string prefix = "run";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses INI text. `source` names the input in diagnostics. Throws
/// ConfigError naming the offending line or section.key.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Lossless INI serialization (17 significant digits).
std::string to_ini(const ExperimentConfig& cfg);

/// Checks the invariants every command relies on; `need_etas` for commands
/// that sweep step sizes.
void validate(const ExperimentConfig& cfg, bool need_etas);

}  // namespace smelab
