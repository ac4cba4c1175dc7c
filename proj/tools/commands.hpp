#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "smelab/config.hpp"
#include "smelab/montecarlo.hpp"
#include "smelab/problem.hpp"

namespace smelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct Context {
  ExperimentConfig cfg;
  ParallelOptions parallel;
  std::ostream* log = nullptr;
};

/// One problem instance per configured dimension (or K); label is empty when
/// only one is configured, otherwise "D<d>" / "K<k>".
struct LabeledProblem {
  std::string label;
  std::unique_ptr<StochasticObjective<double>> problem;
};

std::vector<LabeledProblem> make_problems(const ExperimentConfig& cfg);

int cmd_weak_error(const Context& ctx);
int cmd_sgd_vs_exact(const Context& ctx);
int cmd_mc_convergence(const Context& ctx);
int cmd_reconstruct(const Context& ctx);
int cmd_project_image(const std::string& image, int n, int modes_per_axis, const std::string& outdir,
                      const std::string& prefix, std::ostream& log);

}  // namespace smelab::cli
