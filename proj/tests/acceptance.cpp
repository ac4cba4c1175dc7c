// Acceptance checks for the primary component. Each criterion prints one
// PASS/FAIL line followed by indented diagnostics.
//
//   smelab_acceptance [--criterion N] [--threads T]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smelab/csv.hpp"
#include "smelab/ingestion.hpp"
#include "smelab/montecarlo.hpp"
#include "smelab/sensing.hpp"

using namespace smelab;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> details;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ParallelOptions g_parallel;

double g4(const VectorXd& v) { return g_norm4(v); }

VectorXd random_state(Eigen::Index d, std::uint64_t seed, double scale) {
  RngStream rng(seed, 0, 1000);
  VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

void describe_rows(Outcome& o, const std::vector<WeakErrorRow>& rows, const std::vector<bool>& excluded) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    o.details.push_back(fmt("eta=%-8g err=%.4e mcse=%.4e ratio=%.2f %s", rows[i].eta, rows[i].err,
                            rows[i].mcse_combined, rows[i].err / rows[i].mcse_combined,
                            excluded[i] ? "(saturated)" : ""));
  }
}

const std::vector<double> kQuadEtas{0.1, 0.05, 0.025, 0.0125};

Outcome criterion_1() {
  const QuadraticProblem<double> p(10);
  const VectorXd zero = VectorXd::Zero(10);
  const SweepSettings s{kQuadEtas, 1.0, 200000, 20240601, g_parallel};
  const auto rows = weak_error_sweep(p, zero, s, g4);
  const auto excluded = saturated_rows(rows);
  Outcome o;
  describe_rows(o, rows, excluded);
  for (double eta : kQuadEtas) {
    const auto steps = StepperConfig<double>::make(eta, 1.0, zero).steps;
    const auto chain = exact_chain_fourth_moments(p, eta, steps, zero);
    o.details.push_back(fmt("exact chain gap at eta=%g: %.4e", eta, std::abs(chain.sgd - chain.em)));
  }
  try {
    const auto fit = fit_slope(rows);
    o.pass = fit.points_used >= 3 && fit.slope >= 1.6 && fit.slope <= 2.4;
    o.summary = fmt("SGD vs SME-EM, D=10: slope %.3f over %zu unsaturated points (need [1.6, 2.4], >= 3)", fit.slope,
                    fit.points_used);
  } catch (const NumericalError& e) {
    o.summary = std::string("SGD vs SME-EM, D=10: ") + e.what();
  }
  return o;
}

Outcome criterion_2() {
  const QuadraticProblem<double> p(10);
  const VectorXd zero = VectorXd::Zero(10);
  const SweepSettings s{kQuadEtas, 1.0, 200000, 20240602, g_parallel};
  const auto rows = exact_reference_sweep(p, zero, s);
  const auto excluded = saturated_rows(rows);
  Outcome o;
  describe_rows(o, rows, excluded);
  for (double eta : kQuadEtas) {
    const auto cfg = StepperConfig<double>::make(eta, 1.0, zero);
    const auto chain = exact_chain_fourth_moments(p, eta, cfg.steps, zero);
    const double ou = ou_exact_reference<double>(p, cfg);
    o.details.push_back(fmt("exact |E SGD chain - exact SME| at eta=%g: %.4e (exact SME value %.4e)", eta,
                            std::abs(chain.sgd - ou), ou));
  }
  try {
    const auto fit = fit_slope(rows);
    o.pass = fit.slope >= 0.7 && fit.slope <= 1.3;
    o.summary = fmt("SGD vs exact SME, D=10: slope %.3f over %zu points (need [0.7, 1.3])", fit.slope, fit.points_used);
  } catch (const NumericalError& e) {
    o.summary = std::string("SGD vs exact SME, D=10: ") + e.what();
  }
  return o;
}

Outcome criterion_3() {
  const QuadraticProblem<double> p(10);
  const std::vector<std::size_t> ns{1000, 4000, 16000, 64000};
  const auto mc = mc_convergence_sweep(p, VectorXd::Zero(10).eval(), 0.05, 1.0, ns, 20, 20240603, g_parallel);
  Outcome o;
  o.details.push_back(fmt("exact SME value %.6e, plateau (exact EM bias) %.4e", mc.exact, mc.plateau));
  for (const auto& r : mc.rows) {
    o.details.push_back(fmt("n=%-6zu err=%.4e se=%.4e %s", r.n, r.err, r.mcse,
                            r.err > 3.0 * mc.plateau ? "" : "(at plateau)"));
  }
  try {
    const auto fit = fit_mc_slope(mc);
    o.pass = fit.slope >= -0.65 && fit.slope <= -0.35;
    o.summary = fmt("MC convergence at eta=1/20: slope %.3f over %zu pre-plateau points (need [-0.65, -0.35])",
                    fit.slope, fit.points_used);
  } catch (const NumericalError& e) {
    o.summary = std::string("MC convergence at eta=1/20: ") + e.what();
  }
  return o;
}

Outcome criterion_4() {
  Outcome o;
  o.pass = true;
  double lo = 1e300, hi = -1e300;
  for (double eta : {1e-3, 5e-4, 2.5e-4, 1e-4, 1e-5, 1e-6}) {
    const double ratio = exact_one_step_gap(1.0, eta, 1.0) / exact_one_step_gap(1.0, eta / 2, 1.0);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    o.pass &= ratio >= 7.0 && ratio <= 9.0;
    o.details.push_back(fmt("eta=%-8g gap=%.6e ratio=%.6f", eta, exact_one_step_gap(1.0, eta, 1.0), ratio));
  }
  o.summary = fmt("one-step gap ratio gap(eta)/gap(eta/2) in [%.4f, %.4f] (need [7, 9])", lo, hi);
  return o;
}

Outcome criterion_5() {
  Outcome o;
  double worst = 0.0;
  auto check = [&](const MatrixXd& q, const std::string& what) {
    const auto f = psd_sqrt(q);
    const double err = (f.s * f.s.transpose() - q).norm() / std::max(1.0, q.norm());
    worst = std::max(worst, err);
    o.details.push_back(fmt("%-32s ||SS^T - Q||_F / max(1, ||Q||_F) = %.3e", what.c_str(), err));
  };
  for (int d : {1, 2, 5, 10, 20, 30}) check(QuadraticProblem<double>(d).sigma(), "quadratic D=" + std::to_string(d));
  for (int k = 1; k <= 6; ++k) {
    const auto p = make_analytic_sensing_problem(k, 10, 0.1);
    check(p.noise_covariance(random_state(p.dim(), 50 + k, 0.2)), "sensing K=" + std::to_string(k) + " random");
    check(p.noise_covariance(VectorXd::Zero(p.dim())), "sensing K=" + std::to_string(k) + " at zero");
  }

  const auto p = make_analytic_sensing_problem(2, 10, 0.1);
  double brute_err = 0.0;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const VectorXd phi = random_state(p.dim(), 60 + t, 0.3);
    const VectorXd gbar = p.full_gradient(phi);
    MatrixXd brute = MatrixXd::Zero(p.dim(), p.dim());
    for (SampleId m = 0; m < p.law_size(); ++m) {
      const VectorXd v = gbar - p.stochastic_gradient(phi, m);
      brute += v * v.transpose();
    }
    brute /= double(p.law_size());
    brute_err = std::max(brute_err, (p.noise_covariance(phi) - brute).cwiseAbs().maxCoeff());
  }
  o.details.push_back(fmt("sensing K=2, N_x=10 grid covariance vs enumeration: max abs diff %.3e", brute_err));
  o.pass = worst <= 1e-10 && brute_err <= 1e-10;
  o.summary = fmt("covariance factors: worst relative error %.3e (need <= 1e-10); enumeration diff %.3e (need <= 1e-10)",
                  worst, brute_err);
  return o;
}

double fd_relative_error(const StochasticObjective<double>& p, const VectorXd& phi, double h) {
  VectorXd fd(p.dim());
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    VectorXd a = phi, b = phi;
    a(i) += h;
    b(i) -= h;
    fd(i) = (p.objective(a) - p.objective(b)) / (2.0 * h);
  }
  const VectorXd g = p.full_gradient(phi);
  return (fd - g).norm() / g.norm();
}

Outcome criterion_6() {
  Outcome o;
  const QuadraticProblem<double> quad(10);
  const auto sensing = make_analytic_sensing_problem(3, 10, 0.1);
  double worst_q = 0.0, worst_s = 0.0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    worst_q = std::max(worst_q, fd_relative_error(quad, random_state(10, 70 + t, 1.0), 1e-5));
    worst_s = std::max(worst_s, fd_relative_error(sensing, random_state(sensing.dim(), 80 + t, 1.0), 1e-5));
  }
  o.details.push_back(fmt("quadratic D=10: max relative error %.3e", worst_q));
  o.details.push_back(fmt("sensing K=3, N_x=10: max relative error %.3e", worst_s));
  o.pass = worst_q <= 1e-6 && worst_s <= 1e-6;
  o.summary = fmt("gradients vs central differences (h=1e-5): max relative error %.3e (need <= 1e-6)",
                  std::max(worst_q, worst_s));
  return o;
}

Outcome criterion_7() {
  Outcome o;
  o.pass = true;
  std::string slopes;
  for (int k : {2, 3}) {
    const auto p = make_analytic_sensing_problem(k, 10, 0.1);
    const SweepSettings s{{0.1, 0.05, 0.025}, 1.0, 100000, 20240607, g_parallel};
    const auto rows = weak_error_sweep<double>(p, VectorXd::Zero(p.dim()), s, g4);
    const auto excluded = saturated_rows(rows);
    o.details.push_back("K=" + std::to_string(k) + ":");
    describe_rows(o, rows, excluded);
    try {
      const auto fit = fit_slope(rows);
      const bool ok = fit.slope >= 1.5 && fit.slope <= 2.5;
      o.pass &= ok;
      slopes += fmt(" K=%d slope %.3f over %zu points;", k, fit.slope, fit.points_used);
    } catch (const NumericalError& e) {
      o.pass = false;
      slopes += fmt(" K=%d: %s;", k, e.what());
    }
  }
  o.summary = "sensing weak error, N_x=10, eps=0.1:" + slopes + " (need [1.5, 2.5])";
  return o;
}

Outcome criterion_8() {
  Outcome o;
  const ModeSet modes(4);
  const GridSpec grid(16);
  double recover = 0.0, idem = 0.0;
  for (std::uint64_t t = 0; t < 5; ++t) {
    const VectorXd c = random_state(16, 90 + t, 1.0);
    const VectorXd back = project_sine(synthesize<double>(c, modes, grid), 4).coeffs;
    recover = std::max(recover, (back - c).cwiseAbs().maxCoeff());

    Field<double> data(16, 16);
    RngStream rng(91, t);
    for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal();
    const VectorXd p1 = project_sine(data, 4).coeffs;
    const VectorXd p2 = project_sine(synthesize<double>(p1, modes, grid), 4).coeffs;
    idem = std::max(idem, (p2 - p1).cwiseAbs().maxCoeff());
  }
  double constant = 0.0;
  for (int n : {8, 16, 37, 64}) {
    const GrayImage out = lanczos_resample(GrayImage(50, 50, 0.6180339887), n);
    for (double v : out.pixels) constant = std::max(constant, std::abs(v - 0.6180339887));
  }
  o.details.push_back(fmt("coefficient recovery: max abs error %.3e", recover));
  o.details.push_back(fmt("idempotence: max abs change %.3e", idem));
  o.details.push_back(fmt("constant image resampling: max deviation %.3e", constant));
  o.pass = recover <= 1e-10 && idem <= 1e-10 && constant <= 1e-12;
  o.summary = fmt("projection recovery %.2e, idempotence %.2e (need <= 1e-10); constant resample %.2e (need <= 1e-12)",
                  recover, idem, constant);
  return o;
}

Outcome criterion_9() {
  Outcome o;
  const auto p = make_analytic_sensing_problem(3, 10, 0.1);
  double worst_mean = 0.0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    worst_mean = std::max(worst_mean, enumerated_noise_mean(random_state(p.dim(), 100 + t, 0.5), p).cwiseAbs().maxCoeff());
  }
  o.details.push_back(fmt("grid mean of the noise: max abs %.3e", worst_mean));

  const QuadraticProblem<double> quad(5);
  std::vector<std::string> csvs;
  bool identical = true;
  for (unsigned threads : {1u, 4u, 16u}) {
    std::ostringstream out;
    for (const StochasticObjective<double>* prob : {static_cast<const StochasticObjective<double>*>(&quad),
                                                    static_cast<const StochasticObjective<double>*>(&p)}) {
      const SweepSettings s{{0.1, 0.05}, 1.0, 5000, 99, {threads, 256}};
      const auto rows = weak_error_sweep<double>(*prob, VectorXd::Zero(prob->dim()), s, g4);
      write_weak_error_csv(out, rows, saturated_rows(rows));
    }
    csvs.push_back(out.str());
    identical &= csvs.back() == csvs.front();
    o.details.push_back(fmt("threads=%-2u sweep CSV %zu bytes, %s", threads, csvs.back().size(),
                            csvs.back() == csvs.front() ? "identical to threads=1" : "DIFFERS from threads=1"));
  }
  o.pass = worst_mean <= 1e-12 && identical;
  o.summary = fmt("noise grid mean %.2e (need <= 1e-12); sweep CSVs %s under 1, 4, 16 threads", worst_mean,
                  identical ? "byte-identical" : "not identical");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  unsigned threads = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads, "Worker threads for Monte Carlo criteria (0 = all cores)");
  CLI11_PARSE(app, argc, argv);
  g_parallel.threads = threads;

  const std::map<int, std::function<Outcome()>> criteria{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4}, {5, criterion_5},
      {6, criterion_6}, {7, criterion_7}, {8, criterion_8}, {9, criterion_9}};

  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (only != 0 && id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.summary.c_str(), secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
