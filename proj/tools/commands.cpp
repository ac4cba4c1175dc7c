#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "smelab/csv.hpp"
#include "smelab/dynamics.hpp"
#include "smelab/ingestion.hpp"
#include "smelab/quadratic.hpp"
#include "smelab/sensing.hpp"

namespace smelab::cli {

namespace fs = std::filesystem;

namespace {

std::string join_name(const std::string& prefix, const std::string& label, const std::string& suffix) {
  return label.empty() ? prefix + "_" + suffix : prefix + "_" + label + "_" + suffix;
}

std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.directory);
  return fs::path(cfg.directory) / name;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

VectorXd initial_state(const ExperimentConfig& cfg, Eigen::Index dim) {
  if (cfg.initial == "zero") return VectorXd::Zero(dim);
  const std::string path = cfg.initial.substr(5);
  std::ifstream in(path);
  if (!in) throw ConfigError("dynamics.initial: cannot open '" + path + "'");
  VectorXd v = read_coefficients(in);
  if (v.size() != dim) {
    throw ConfigError("dynamics.initial: '" + path + "' holds " + std::to_string(v.size()) +
                      " coefficients, problem dimension is " + std::to_string(dim));
  }
  return v;
}

VectorXd sensing_target(const ExperimentConfig& cfg, int k) {
  const ModeSet modes(k);
  const int proj_points = target_projection_points(k, cfg.grid_points_per_axis);
  if (cfg.target == "analytic") return build_target(TargetSpec{}, modes, GridSpec(proj_points));
  const GrayImage img = load_image(cfg.target.substr(6));
  return project_sine(image_to_field(lanczos_resample(img, proj_points)), k).coeffs;
}

SweepSettings sweep_settings(const Context& ctx) {
  return {ctx.cfg.etas, ctx.cfg.horizon, ctx.cfg.trials, ctx.cfg.base_seed, ctx.parallel};
}

// Writes the fit sidecar; returns false when too few points survive the guard.
bool write_fit(const fs::path& path, const std::vector<LogLogPoint>& pts, double guard, const std::string& label,
               std::ostream& log) {
  nlohmann::ordered_json extra;
  extra["label"] = label;
  extra["guard"] = guard;
  try {
    const SlopeFit fit = fit_loglog(pts, guard);
    write_text(path, slope_json(fit, extra.dump()));
    log << (label.empty() ? "" : label + ": ") << "slope " << format_real(fit.slope) << " over " << fit.points_used
        << " point(s), " << fit.points_excluded_saturated << " excluded as saturated\n";
    return true;
  } catch (const NumericalError& e) {
    nlohmann::ordered_json j;
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["points_used"] = 0;
    j["points_excluded"] = pts.size();
    j["error"] = e.what();
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_text(path, j.dump(2) + "\n");
    log << (label.empty() ? "" : label + ": ") << e.what() << "\n";
    return false;
  }
}

int sweep_command(const Context& ctx, bool against_exact) {
  validate(ctx.cfg, true);
  const auto problems = make_problems(ctx.cfg);
  std::ostream& log = *ctx.log;
  bool all_fitted = true;
  for (const auto& lp : problems) {
    const VectorXd initial = initial_state(ctx.cfg, lp.problem->dim());
    const auto rows = against_exact
                          ? exact_reference_sweep(*lp.problem, initial, sweep_settings(ctx))
                          : weak_error_sweep(*lp.problem, initial, sweep_settings(ctx),
                                             [](const VectorXd& v) { return g_norm4(v); });
    const auto excluded = saturated_rows(rows, ctx.cfg.guard);
    const std::string stem = against_exact ? "sgd_vs_exact" : "weak_error";

    std::ostringstream csv;
    write_weak_error_csv(csv, rows, excluded);
    write_text(output_path(ctx.cfg, join_name(ctx.cfg.prefix, lp.label, stem + ".csv")), csv.str());

    std::vector<LogLogPoint> pts;
    for (const auto& r : rows) pts.push_back({r.eta, r.err, r.mcse_combined});
    const std::string json_name = against_exact ? "sgd_vs_exact_slope.json" : "slope.json";
    all_fitted &= write_fit(output_path(ctx.cfg, join_name(ctx.cfg.prefix, lp.label, json_name)), pts,
                            ctx.cfg.guard, lp.label, log);
  }
  return all_fitted ? kExitOk : kExitNumerical;
}

}  // namespace

std::vector<LabeledProblem> make_problems(const ExperimentConfig& cfg) {
  std::vector<LabeledProblem> out;
  if (cfg.kind == ProblemKind::Quadratic) {
    for (int d : cfg.dimensions) {
      out.push_back({cfg.dimensions.size() > 1 ? "D" + std::to_string(d) : "",
                     std::make_unique<QuadraticProblem<double>>(d, cfg.decay, cfg.zeta)});
    }
  } else {
    for (int k : cfg.modes_per_axis) {
      out.push_back({cfg.modes_per_axis.size() > 1 ? "K" + std::to_string(k) : "",
                     std::make_unique<SensingProblem<double>>(k, cfg.grid_points_per_axis, cfg.epsilon,
                                                              sensing_target(cfg, k))});
    }
  }
  return out;
}

int cmd_weak_error(const Context& ctx) { return sweep_command(ctx, false); }

int cmd_sgd_vs_exact(const Context& ctx) {
  if (ctx.cfg.kind != ProblemKind::Quadratic) {
    throw UnsupportedOperation("sgd-vs-exact: exact SME moments are only available for the quadratic problem");
  }
  return sweep_command(ctx, true);
}

int cmd_mc_convergence(const Context& ctx) {
  validate(ctx.cfg, true);
  if (ctx.cfg.kind != ProblemKind::Quadratic) {
    throw UnsupportedOperation("mc-convergence: exact SME moments are only available for the quadratic problem");
  }
  if (ctx.cfg.ns.empty()) throw ConfigError("mc.ns: required field is missing");
  std::ostream& log = *ctx.log;
  bool all_fitted = true;
  for (const auto& lp : make_problems(ctx.cfg)) {
    const auto& quad = dynamic_cast<const QuadraticProblem<double>&>(*lp.problem);
    const VectorXd initial = initial_state(ctx.cfg, quad.dim());
    for (double eta : ctx.cfg.etas) {
      std::string label = lp.label;
      if (ctx.cfg.etas.size() > 1) label += (label.empty() ? "" : "_") + std::string("eta") + short_real(eta);
      const auto mc = mc_convergence_sweep(quad, initial, eta, ctx.cfg.horizon, ctx.cfg.ns, ctx.cfg.repeats,
                                           ctx.cfg.base_seed, ctx.parallel);
      std::ostringstream csv;
      write_mc_csv(csv, mc.rows);
      write_text(output_path(ctx.cfg, join_name(ctx.cfg.prefix, label, "mc.csv")), csv.str());

      log << (label.empty() ? "" : label + ": ") << "exact E g = " << format_real(mc.exact)
          << ", discretization plateau = " << format_real(mc.plateau) << "\n";
      std::vector<LogLogPoint> pts;
      for (const auto& r : mc.rows) pts.push_back({double(r.n), r.err, mc.plateau});
      all_fitted &= write_fit(output_path(ctx.cfg, join_name(ctx.cfg.prefix, label, "mc_slope.json")), pts,
                              ctx.cfg.guard, label, log);
    }
  }
  return all_fitted ? kExitOk : kExitNumerical;
}

int cmd_reconstruct(const Context& ctx) {
  validate(ctx.cfg, true);
  if (ctx.cfg.kind != ProblemKind::Sensing) {
    throw UnsupportedOperation("reconstruct: requires a sensing problem");
  }
  if (ctx.cfg.snapshots.empty()) throw ConfigError("dynamics.snapshots: required field is missing");
  const double eta = ctx.cfg.etas.front();
  for (double t : ctx.cfg.snapshots) {
    if (t > ctx.cfg.horizon) throw ConfigError("dynamics.snapshots: time " + short_real(t) + " exceeds the horizon");
  }
  std::ostream& log = *ctx.log;

  for (const auto& lp : make_problems(ctx.cfg)) {
    const auto& sensing = dynamic_cast<const SensingProblem<double>&>(*lp.problem);
    const auto cfg = StepperConfig<double>::make(eta, ctx.cfg.horizon, initial_state(ctx.cfg, sensing.dim()));
    const GridSpec& grid = sensing.grid();

    std::vector<std::pair<std::size_t, double>> marks;
    for (double t : ctx.cfg.snapshots) {
      marks.emplace_back(std::size_t(std::floor(t / eta * (1.0 + 1e-12))), t);
    }
    auto emit = [&](const std::string& side, const VectorXd& phi, double t) {
      std::ostringstream csv;
      write_field_csv(csv, synthesize<double>(phi, sensing.modes(), grid), grid);
      write_text(output_path(ctx.cfg, join_name(ctx.cfg.prefix, lp.label, side + "_t" + short_real(t) + ".csv")),
                 csv.str());
    };
    auto observer = [&](const std::string& side) {
      for (const auto& [step, t] : marks)
        if (step == 0) emit(side, cfg.initial, t);
      return [&, side](std::size_t n, const VectorXd& phi) {
        for (const auto& [step, t] : marks)
          if (step == n) emit(side, phi, t);
      };
    };

    {
      std::ostringstream csv;
      write_field_csv(csv, synthesize<double>(sensing.target(), sensing.modes(), grid), grid);
      write_text(output_path(ctx.cfg, join_name(ctx.cfg.prefix, lp.label, "target.csv")), csv.str());
    }
    RngStream sgd_rng(ctx.cfg.base_seed, 0, stream_space(Side::Sgd, 0));
    const VectorXd sgd_end = sgd_run(sensing, cfg, sgd_rng, observer("sgd"));
    RngStream sme_rng(ctx.cfg.base_seed, 0, stream_space(Side::Sme, 0));
    const VectorXd sme_end = sme_em_run(sensing, cfg, sme_rng, observer("sme"));
    log << (lp.label.empty() ? "" : lp.label + ": ") << cfg.steps << " steps; final distance to target: SGD "
        << format_real((sgd_end - sensing.target()).norm()) << ", SME-EM "
        << format_real((sme_end - sensing.target()).norm()) << "\n";
  }
  return kExitOk;
}

int cmd_project_image(const std::string& image, int n, int modes_per_axis, const std::string& outdir,
                      const std::string& prefix, std::ostream& log) {
  const GrayImage img = load_image(image);
  const GrayImage resampled = lanczos_resample(img, n);
  const Field<double> data = image_to_field(resampled);
  const ProjectionResult proj = project_sine(data, modes_per_axis);
  const GridSpec grid(n);
  const ModeSet modes(modes_per_axis);

  fs::create_directories(outdir);
  std::ostringstream a, b, c;
  write_field_csv(a, data, grid);
  write_coeff_csv(b, proj.coeffs, modes);
  write_field_csv(c, synthesize<double>(proj.coeffs, modes, grid), grid);
  write_text(fs::path(outdir) / (prefix + "_resampled.csv"), a.str());
  write_text(fs::path(outdir) / (prefix + "_coeffs.csv"), b.str());
  write_text(fs::path(outdir) / (prefix + "_reconstruction.csv"), c.str());
  log << img.width << "x" << img.height << " -> " << n << "x" << n << ", " << modes.size()
      << " modes, residual norm " << format_real(proj.residual_norm) << "\n";
  return kExitOk;
}

}  // namespace smelab::cli
