#pragma once

// Parallel Monte Carlo estimation of E g(phi_k), weak-error sweeps and
// log-log slope fitting.
//
// Trials are grouped into fixed-size chunks. Each chunk accumulates its own
// running mean/variance; chunks are merged in index order once all workers
// finish, so results do not depend on the number of threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "smelab/dynamics.hpp"
#include "smelab/quadratic.hpp"

namespace smelab {

struct ParallelOptions {
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  std::size_t chunk = 512;

  unsigned resolved_threads() const {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return threads == 0 ? hw : threads;
  }
};

/// Welford accumulator with Chan's pairwise merge.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / double(n);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = double(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * double(o.n) / total;
    m2 += o.m2 + delta * delta * double(n) * double(o.n) / total;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

struct Estimate {
  double mean = 0.0;
  /// Sample standard deviation / sqrt(n).
  double mcse = 0.0;
  std::size_t n = 0;
};

/// Stream-id namespaces. SGD and SME trials never share a stream.
enum class Side : std::uint64_t { Sgd = 0, Sme = 1 };

inline std::uint64_t stream_space(Side side, std::uint64_t row) { return (row << 1) | std::uint64_t(side); }

/// Runs `trial(i)` for i in [0, n) across worker threads; trial returns the
/// sampled functional value. The first failing trial (lowest index) is
/// rethrown after all workers stop.
template <typename Trial>
Estimate run_trials(Trial&& trial, std::size_t n, const ParallelOptions& opts = {}) {
  if (n < 2) throw std::invalid_argument("estimate: need at least 2 trials");
  const std::size_t chunk = std::max<std::size_t>(1, opts.chunk);
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<RunningStats> partial(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks || failed.load(std::memory_order_relaxed)) return;
      try {
        RunningStats stats;
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) stats.push(trial(i));
        partial[c] = stats;
      } catch (...) {
        errors[c] = std::current_exception();
        failed = true;
      }
    }
  };

  const unsigned threads = unsigned(std::min<std::size_t>(opts.resolved_threads(), chunks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunningStats total;
  for (const auto& s : partial) total.merge(s);
  return {total.mean, std::sqrt(total.variance() / double(total.n)), total.n};
}

/// Mean and MCSE of g(run(stream_i)) over streams i = 0..n-1 of
/// (base_seed, space).
template <typename Run, typename G>
Estimate estimate(Run&& run, G&& g, std::size_t n, std::uint64_t base_seed, std::uint64_t space = 0,
                  const ParallelOptions& opts = {}) {
  return run_trials(
      [&](std::size_t i) {
        RngStream rng(base_seed, i, space);
        return double(g(run(rng)));
      },
      n, opts);
}

struct WeakErrorRow {
  double eta = 0.0;
  double err = 0.0;
  /// sqrt(mcse_a^2 + mcse_b^2); one-sided when compared against an exact value.
  double mcse_combined = 0.0;
  std::size_t n = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

struct SweepSettings {
  std::vector<double> etas;
  double horizon = 1.0;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  ParallelOptions parallel;
};

/// |E g(SGD) - E g(SME-EM)| per step size, independent noise per side.
template <typename Scalar, typename G>
std::vector<WeakErrorRow> weak_error_sweep(const StochasticObjective<Scalar>& p, const CoeffVec<Scalar>& initial,
                                           const SweepSettings& s, G&& g) {
  std::vector<WeakErrorRow> rows;
  for (std::size_t r = 0; r < s.etas.size(); ++r) {
    const auto cfg = StepperConfig<Scalar>::make(Scalar(s.etas[r]), Scalar(s.horizon), initial);
    const SmeEmStepper<Scalar> sme(p, cfg);
    const Estimate a = estimate([&](RngStream& rng) { return sgd_run(p, cfg, rng); }, g, s.trials, s.base_seed,
                                stream_space(Side::Sgd, r), s.parallel);
    const Estimate b = estimate([&](RngStream& rng) { return sme.run(rng); }, g, s.trials, s.base_seed,
                                stream_space(Side::Sme, r), s.parallel);
    rows.push_back({s.etas[r], std::abs(a.mean - b.mean), std::hypot(a.mcse, b.mcse), s.trials, a.mean, b.mean});
  }
  return rows;
}

/// |E g(SGD) - E ||phi_T||^4 of the exact SME| per step size (quadratic only).
template <typename Scalar>
std::vector<WeakErrorRow> exact_reference_sweep(const StochasticObjective<Scalar>& p, const CoeffVec<Scalar>& initial,
                                                const SweepSettings& s) {
  std::vector<WeakErrorRow> rows;
  for (std::size_t r = 0; r < s.etas.size(); ++r) {
    const auto cfg = StepperConfig<Scalar>::make(Scalar(s.etas[r]), Scalar(s.horizon), initial);
    const double exact = double(ou_exact_reference(p, cfg));
    const Estimate a = estimate([&](RngStream& rng) { return sgd_run(p, cfg, rng); },
                                [](const CoeffVec<Scalar>& v) { return g_norm4(v); }, s.trials, s.base_seed,
                                stream_space(Side::Sgd, r), s.parallel);
    rows.push_back({s.etas[r], std::abs(a.mean - exact), a.mcse, s.trials, a.mean, exact});
  }
  return rows;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points_used = 0;
  std::size_t points_excluded_saturated = 0;
  /// Per input point: true when dropped by the saturation guard.
  std::vector<bool> excluded;
};

struct LogLogPoint {
  double x = 0.0;
  double err = 0.0;
  /// Noise floor for this point; the point is used when err > guard * floor.
  double floor = 0.0;
};

/// OLS of log(err) on log(x) over points with err > guard * floor.
inline SlopeFit fit_loglog(std::span<const LogLogPoint> points, double guard = 3.0) {
  SlopeFit fit;
  fit.excluded.assign(points.size(), false);
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (pt.err > guard * pt.floor && pt.err > 0.0 && pt.x > 0.0) {
      xy.emplace_back(std::log(pt.x), std::log(pt.err));
    } else {
      fit.excluded[i] = true;
      ++fit.points_excluded_saturated;
    }
  }
  fit.points_used = xy.size();
  if (xy.size() < 2) {
    throw NumericalError("fit_slope: only " + std::to_string(xy.size()) +
                         " point(s) above the saturation guard; increase the number of trials or use larger step sizes");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= double(xy.size());
  my /= double(xy.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx <= 0.0) throw NumericalError("fit_slope: step sizes are not distinct");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

inline SlopeFit fit_slope(std::span<const WeakErrorRow> rows, double guard = 3.0) {
  std::vector<LogLogPoint> pts;
  for (const auto& r : rows) pts.push_back({r.eta, r.err, r.mcse_combined});
  return fit_loglog(pts, guard);
}

/// Saturation flags without failing when too few points survive.
inline std::vector<bool> saturated_rows(std::span<const WeakErrorRow> rows, double guard = 3.0) {
  std::vector<bool> out;
  for (const auto& r : rows) out.push_back(!(r.err > guard * r.mcse_combined && r.err > 0.0));
  return out;
}

struct McRow {
  std::size_t n = 0;
  /// Mean over repeats of |estimate - exact|.
  double err = 0.0;
  /// Standard error of that mean over repeats.
  double mcse = 0.0;
  std::size_t repeats = 0;
};

struct McConvergence {
  std::vector<McRow> rows;
  double exact = 0.0;
  /// |E g(SME-EM chain) - exact|, the level the error saturates at.
  double plateau = 0.0;
};

/// Convergence of the SME-EM Monte Carlo estimate of E ||phi_T||^4 towards the
/// exact SME value as the trial count grows. Repeat r uses its own stream
/// space, so repeats are independent.
template <typename Scalar>
McConvergence mc_convergence_sweep(const QuadraticProblem<Scalar>& p, const CoeffVec<Scalar>& initial, double eta,
                                   double horizon, std::span<const std::size_t> ns, std::size_t repeats,
                                   std::uint64_t base_seed, const ParallelOptions& opts = {}) {
  if (repeats < 1) throw std::invalid_argument("mc_convergence_sweep: repeats must be >= 1");
  const auto cfg = StepperConfig<Scalar>::make(Scalar(eta), Scalar(horizon), initial);
  const SmeEmStepper<Scalar> sme(p, cfg);

  McConvergence out;
  out.exact = double(ou_exact_reference(p, cfg));
  out.plateau = std::abs(double(exact_chain_fourth_moments(p, cfg.eta, cfg.steps, initial).em) - out.exact);

  for (std::size_t j = 0; j < ns.size(); ++j) {
    RunningStats over_repeats;
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::uint64_t space = (std::uint64_t(j) << 32) | std::uint64_t(r);
      const Estimate e = estimate([&](RngStream& rng) { return sme.run(rng); },
                                  [](const CoeffVec<Scalar>& v) { return g_norm4(v); }, ns[j], base_seed, space, opts);
      over_repeats.push(std::abs(e.mean - out.exact));
    }
    const double se = repeats > 1 ? std::sqrt(over_repeats.variance() / double(repeats)) : 0.0;
    out.rows.push_back({ns[j], over_repeats.mean, se, repeats});
  }
  return out;
}

/// Slope of error against n over rows still above guard * plateau.
inline SlopeFit fit_mc_slope(const McConvergence& mc, double guard = 3.0) {
  std::vector<LogLogPoint> pts;
  for (const auto& r : mc.rows) pts.push_back({double(r.n), r.err, mc.plateau});
  return fit_loglog(pts, guard);
}

}  // namespace smelab
