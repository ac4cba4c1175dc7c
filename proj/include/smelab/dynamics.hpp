#pragma once

// The two discrete dynamics compared throughout:
//   SGD    phi_{n+1}  = phi_n  - eta grad F_{s_n}(phi_n)
//   SME-EM phi~_{n+1} = phi~_n - eta grad F(phi~_n) + eta S(phi~_n) xi_n
// with S S^T = Q(phi~_n) and xi_n ~ N(0, I), run for floor(T / eta) steps.

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "smelab/covariance.hpp"
#include "smelab/problem.hpp"
#include "smelab/quadratic.hpp"

namespace smelab {

template <typename Scalar>
struct StepperConfig {
  Scalar eta = Scalar(0);
  Scalar horizon = Scalar(0);
  std::size_t steps = 0;
  CoeffVec<Scalar> initial;

  static StepperConfig make(Scalar eta, Scalar horizon, CoeffVec<Scalar> initial) {
    if (!(eta > Scalar(0)) || !(horizon > Scalar(0))) {
      throw std::invalid_argument("StepperConfig: eta and horizon must be positive");
    }
    require_finite(initial, "StepperConfig initial");
    // T / eta may land a few ulps below an integer (0.3 / 0.1); such ratios
    // count as whole steps.
    const auto steps = std::size_t(std::floor(horizon / eta * (Scalar(1) + Scalar(1e-12))));
    if (steps < 1) throw std::invalid_argument("StepperConfig: horizon shorter than one step");
    return {eta, horizon, steps, std::move(initial)};
  }
};

inline constexpr double kDivergenceNorm = 1e12;

namespace detail {

template <typename Scalar>
void check_iterate(const CoeffVec<Scalar>& phi, std::size_t step, const RngStream& rng, const char* who) {
  if (!phi.allFinite() || phi.norm() > Scalar(kDivergenceNorm)) {
    throw TrajectoryError(std::string(who) + ": iterate diverged at step " + std::to_string(step) +
                              " (stream " + std::to_string(rng.stream_id()) + "); reduce the step size",
                          step, rng.stream_id());
  }
}

struct NoObserver {
  template <typename V>
  void operator()(std::size_t, const V&) const {}
};

}  // namespace detail

/// Runs SGD; `observe(n, phi_n)` is called after each completed step n >= 1.
template <typename Scalar, typename Observer = detail::NoObserver>
CoeffVec<Scalar> sgd_run(const StochasticObjective<Scalar>& p, const StepperConfig<Scalar>& cfg, RngStream& rng,
                         Observer&& observe = {}) {
  require_same_dim(cfg.initial.size(), p.dim(), "sgd_run");
  CoeffVec<Scalar> phi = cfg.initial;
  for (std::size_t n = 0; n < cfg.steps; ++n) {
    const SampleId s = p.draw_sample(rng);
    phi -= cfg.eta * p.stochastic_gradient(phi, s);
    detail::check_iterate(phi, n + 1, rng, "sgd_run");
    observe(n + 1, phi);
  }
  return phi;
}

/// Euler-Maruyama stepper for the SME. For homogeneous problems the diffusion
/// factor is computed once here; otherwise it is re-assembled from Q at every
/// iterate. Immutable, so one instance serves many trajectories.
template <typename Scalar>
class SmeEmStepper {
 public:
  SmeEmStepper(const StochasticObjective<Scalar>& p, StepperConfig<Scalar> cfg) : p_(&p), cfg_(std::move(cfg)) {
    require_same_dim(cfg_.initial.size(), p.dim(), "sme_em_run");
    if (p.is_homogeneous()) constant_ = psd_sqrt(p.noise_covariance(cfg_.initial));
  }

  const StepperConfig<Scalar>& config() const { return cfg_; }

  template <typename Observer = detail::NoObserver>
  CoeffVec<Scalar> run(RngStream& rng, Observer&& observe = {}) const {
    CoeffVec<Scalar> phi = cfg_.initial;
    for (std::size_t n = 0; n < cfg_.steps; ++n) {
      const CoeffVec<Scalar> drift = p_->full_gradient(phi);
      if (constant_) {
        phi += -cfg_.eta * drift + cfg_.eta * draw_noise(*constant_, rng);
      } else {
        const CovFactor<Scalar> f = psd_sqrt(p_->noise_covariance(phi));
        phi += -cfg_.eta * drift + cfg_.eta * draw_noise(f, rng);
      }
      detail::check_iterate(phi, n + 1, rng, "sme_em_run");
      observe(n + 1, phi);
    }
    return phi;
  }

 private:
  const StochasticObjective<Scalar>* p_;
  StepperConfig<Scalar> cfg_;
  std::optional<CovFactor<Scalar>> constant_;
};

template <typename Scalar, typename Observer = detail::NoObserver>
CoeffVec<Scalar> sme_em_run(const StochasticObjective<Scalar>& p, const StepperConfig<Scalar>& cfg, RngStream& rng,
                            Observer&& observe = {}) {
  return SmeEmStepper<Scalar>(p, cfg).run(rng, std::forward<Observer>(observe));
}

/// E ||phi_T||^4 of the exact SME solution; quadratic problems only.
template <typename Scalar>
Scalar ou_exact_reference(const StochasticObjective<Scalar>& p, const StepperConfig<Scalar>& cfg) {
  const auto* quad = dynamic_cast<const QuadraticProblem<Scalar>*>(&p);
  if (quad == nullptr) {
    throw UnsupportedOperation("ou_exact_reference: exact SME moments are only available for the quadratic problem");
  }
  return exact_sme_covariance(*quad, cfg.horizon, cfg.eta, cfg.initial).eg4;
}

}  // namespace smelab
