#pragma once

#include <cstdint>

#include "smelab/coeffspace.hpp"
#include "smelab/rng.hpp"

namespace smelab {

/// Index into a problem's finite sample space: a bit mask of zeta outcomes for
/// the quadratic problem, a grid-node index for the sensing problems.
using SampleId = std::uint64_t;

/// Contract shared by every objective family. Implementations are immutable
/// after construction; all mutable randomness comes in through RngStream.
template <typename Scalar>
class StochasticObjective {
 public:
  using Vec = CoeffVec<Scalar>;
  using Mat = Matrix<Scalar>;

  virtual ~StochasticObjective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual SampleId draw_sample(RngStream& rng) const = 0;

  /// Exact mean of stochastic_gradient over the sampling law.
  virtual Vec full_gradient(const Vec& phi) const = 0;
  virtual Vec stochastic_gradient(const Vec& phi, SampleId s) const = 0;
  virtual Mat noise_covariance(const Vec& phi) const = 0;
  virtual bool is_homogeneous() const = 0;

  /// Objective value up to an additive constant.
  virtual Scalar objective(const Vec& phi) const = 0;

  /// The sampling law is finite: outcomes 0..law_size()-1.
  virtual std::uint64_t law_size() const = 0;
  virtual Scalar law_probability(SampleId s) const = 0;
};

/// V(phi; s) = grad F(phi) - grad F_s(phi).
template <typename Scalar>
CoeffVec<Scalar> noise(const CoeffVec<Scalar>& phi, SampleId s, const StochasticObjective<Scalar>& p) {
  require_same_dim(phi.size(), p.dim(), "noise");
  return p.full_gradient(phi) - p.stochastic_gradient(phi, s);
}

/// Sum over the whole law of P(s) * V(phi; s) (V ⊗ V). Only feasible for small
/// law sizes; used to cross-check noise_covariance.
template <typename Scalar>
Matrix<Scalar> enumerated_noise_covariance(const CoeffVec<Scalar>& phi, const StochasticObjective<Scalar>& p) {
  Matrix<Scalar> cov = Matrix<Scalar>::Zero(p.dim(), p.dim());
  for (SampleId s = 0; s < p.law_size(); ++s) {
    const CoeffVec<Scalar> v = noise(phi, s, p);
    cov.noalias() += p.law_probability(s) * v * v.transpose();
  }
  return cov;
}

template <typename Scalar>
CoeffVec<Scalar> enumerated_noise_mean(const CoeffVec<Scalar>& phi, const StochasticObjective<Scalar>& p) {
  CoeffVec<Scalar> mean = CoeffVec<Scalar>::Zero(p.dim());
  for (SampleId s = 0; s < p.law_size(); ++s) mean += p.law_probability(s) * noise(phi, s, p);
  return mean;
}

}  // namespace smelab
