#pragma once

// Quadratic objective with homogeneous noise:
//   F_gamma(phi) = <phi - gamma, Lambda (phi - gamma)>,  Lambda_ij = decay^|i-j|,
//   gamma = sum_i zeta_i / i e_i with zeta_i i.i.d. two-point variables.
// Also hosts the closed-form moment oracles for the OU limit and for both
// discrete chains.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>

#include "smelab/covariance.hpp"
#include "smelab/problem.hpp"

namespace smelab {

/// P(zeta = high) = p_high, P(zeta = low) = 1 - p_high. Must have mean 0 and
/// variance 1.
struct ZetaLaw {
  double low = -0.5;
  double high = 2.0;
  double p_high = 0.2;

  friend bool operator==(const ZetaLaw&, const ZetaLaw&) = default;

  double moment(int order) const {
    return (1.0 - p_high) * std::pow(low, order) + p_high * std::pow(high, order);
  }

  void validate() const {
    if (!(p_high > 0.0 && p_high < 1.0)) throw ConfigError("zeta law: p_high must lie in (0, 1)");
    if (std::abs(moment(1)) > 1e-12) throw ConfigError("zeta law: mean must be 0");
    if (std::abs(moment(2) - 1.0) > 1e-12) throw ConfigError("zeta law: variance must be 1");
  }
};

template <typename Scalar = double>
class QuadraticProblem final : public StochasticObjective<Scalar> {
 public:
  using Vec = CoeffVec<Scalar>;
  using Mat = Matrix<Scalar>;

  static constexpr Eigen::Index kMaxDim = 64;

  explicit QuadraticProblem(Eigen::Index dimension, Scalar decay = Scalar(0.8), ZetaLaw law = {})
      : decay_(decay), law_(law) {
    if (dimension < 1 || dimension > kMaxDim) {
      throw ConfigError("quadratic problem: dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (!(decay > Scalar(0) && decay < Scalar(1))) {
      throw ConfigError("quadratic problem: decay must lie in (0, 1)");
    }
    law_.validate();

    const Eigen::Index d = dimension;
    lambda_.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) lambda_(i, j) = std::pow(decay, Scalar(std::abs(i - j)));

    q_gamma_.resize(d);
    gamma_scale_.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      q_gamma_(i) = Scalar(1) / Scalar((i + 1) * (i + 1));
      gamma_scale_(i) = Scalar(1) / Scalar(i + 1);
    }

    Eigen::SelfAdjointEigenSolver<Mat> eig(lambda_);
    lambda_eigenvalues_ = eig.eigenvalues();
    lambda_eigenvectors_ = eig.eigenvectors();
    if (lambda_eigenvalues_.minCoeff() <= Scalar(0)) {
      throw NumericalError("quadratic problem: Lambda is not positive definite");
    }

    sigma_ = Scalar(4) * lambda_ * q_gamma_.asDiagonal() * lambda_;
    sigma_ = Scalar(0.5) * (sigma_ + sigma_.transpose()).eval();
    sigma_factor_ = psd_sqrt(sigma_);
  }

  Eigen::Index dim() const override { return lambda_.rows(); }
  const Mat& lambda() const { return lambda_; }
  const Vec& lambda_eigenvalues() const { return lambda_eigenvalues_; }
  const Mat& lambda_eigenvectors() const { return lambda_eigenvectors_; }
  /// Diagonal of Cov(gamma), entries 1/i^2.
  const Vec& q_gamma() const { return q_gamma_; }
  /// Constant noise covariance 4 Lambda Q Lambda.
  const Mat& sigma() const { return sigma_; }
  const CovFactor<Scalar>& sigma_factor() const { return sigma_factor_; }
  const ZetaLaw& zeta_law() const { return law_; }
  Scalar decay() const { return decay_; }

  /// Bit i of s selects zeta_{i+1} = high.
  Vec gamma(SampleId s) const {
    Vec g(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      const bool high = (s >> i) & 1u;
      g(i) = Scalar(high ? law_.high : law_.low) * gamma_scale_(i);
    }
    return g;
  }

  SampleId draw_sample(RngStream& rng) const override {
    SampleId s = 0;
    for (Eigen::Index i = 0; i < dim(); ++i) {
      if (rng.bernoulli(law_.p_high)) s |= SampleId(1) << i;
    }
    return s;
  }

  Vec sample_gamma(RngStream& rng) const { return gamma(draw_sample(rng)); }

  Vec full_gradient(const Vec& phi) const override {
    require_same_dim(phi.size(), dim(), "quadratic full_gradient");
    return Scalar(2) * (lambda_ * phi);
  }

  Vec stochastic_gradient(const Vec& phi, SampleId s) const override {
    require_same_dim(phi.size(), dim(), "quadratic stochastic_gradient");
    return Scalar(2) * (lambda_ * (phi - gamma(s)));
  }

  Mat noise_covariance(const Vec& phi) const override {
    require_same_dim(phi.size(), dim(), "quadratic noise_covariance");
    return sigma_;
  }

  bool is_homogeneous() const override { return true; }

  /// <phi, Lambda phi>; the constant Tr(Lambda Q) is omitted.
  Scalar objective(const Vec& phi) const override {
    require_same_dim(phi.size(), dim(), "quadratic objective");
    return phi.dot(lambda_ * phi);
  }

  std::uint64_t law_size() const override {
    return dim() >= 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << dim());
  }

  Scalar law_probability(SampleId s) const override {
    const int highs = std::popcount(s);
    return Scalar(std::pow(law_.p_high, highs) * std::pow(1.0 - law_.p_high, int(dim()) - highs));
  }

 private:
  Scalar decay_;
  ZetaLaw law_;
  Mat lambda_;
  Vec lambda_eigenvalues_;
  Mat lambda_eigenvectors_;
  Vec q_gamma_;
  Vec gamma_scale_;
  Mat sigma_;
  CovFactor<Scalar> sigma_factor_;
};

/// Gaussian law N(mean, cov) of the exact SME solution at time T.
template <typename Scalar>
struct OUMoments {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  Scalar trace = Scalar(0);
  /// E ||phi_T||^4.
  Scalar eg4 = Scalar(0);
};

/// E ||X||^4 for X ~ N(m, C) (Isserlis).
template <typename Scalar>
Scalar gaussian_fourth_moment(const Vector<Scalar>& m, const Matrix<Scalar>& c) {
  const Scalar tr = c.trace();
  const Scalar m2 = m.squaredNorm();
  return m2 * m2 + Scalar(2) * m2 * tr + Scalar(4) * m.dot(c * m) + tr * tr +
         Scalar(2) * (c.array() * c.transpose().array()).sum();
}

/// Exact law of d phi = -2 Lambda phi dt + sqrt(eta) sigma dW from phi0 at time T.
template <typename Scalar>
OUMoments<Scalar> exact_sme_covariance(const QuadraticProblem<Scalar>& p, Scalar horizon, Scalar eta,
                                       const Vector<Scalar>& initial) {
  if (!(horizon > Scalar(0)) || !(eta > Scalar(0))) {
    throw std::invalid_argument("exact_sme_covariance: T and eta must be positive");
  }
  require_same_dim(initial.size(), p.dim(), "exact_sme_covariance");
  const auto& mu = p.lambda_eigenvalues();
  const auto& u = p.lambda_eigenvectors();
  const Matrix<Scalar> sigma_rot = u.transpose() * p.sigma() * u;

  Matrix<Scalar> c_rot(p.dim(), p.dim());
  for (Eigen::Index i = 0; i < p.dim(); ++i) {
    for (Eigen::Index j = 0; j < p.dim(); ++j) {
      const Scalar rate = Scalar(2) * (mu(i) + mu(j));
      if (!(rate > Scalar(0))) throw NumericalError("exact_sme_covariance: non-positive decay rate");
      c_rot(i, j) = eta * sigma_rot(i, j) * -std::expm1(-rate * horizon) / rate;
    }
  }

  OUMoments<Scalar> out;
  out.cov = u * c_rot * u.transpose();
  out.cov = Scalar(0.5) * (out.cov + out.cov.transpose()).eval();
  const Vector<Scalar> decay_t = (Scalar(-2) * mu.array() * horizon).exp();
  out.mean = u * (decay_t.asDiagonal() * (u.transpose() * initial));
  out.trace = out.cov.trace();
  out.eg4 = gaussian_fourth_moment(out.mean, out.cov);
  return out;
}

template <typename Scalar>
OUMoments<Scalar> exact_sme_covariance(const QuadraticProblem<Scalar>& p, Scalar horizon, Scalar eta) {
  return exact_sme_covariance(p, horizon, eta, Vector<Scalar>::Zero(p.dim()).eval());
}

/// Exact E ||phi||^4 after `steps` iterations of both discrete chains started
/// at phi0. Both share mean A^k phi0 and covariance sum_n M_n Q M_n^T with
/// A = I - 2 eta Lambda and M_n = A^n 2 eta Lambda; the SGD chain adds the
/// third- and fourth-cumulant terms of the two-point gamma law, which the
/// Gaussian Euler-Maruyama chain lacks.
template <typename Scalar>
struct ChainFourthMoments {
  Scalar em = Scalar(0);
  Scalar sgd = Scalar(0);
};

template <typename Scalar>
ChainFourthMoments<Scalar> exact_chain_fourth_moments(const QuadraticProblem<Scalar>& p, Scalar eta,
                                                      std::size_t steps, const Vector<Scalar>& initial) {
  require_same_dim(initial.size(), p.dim(), "exact_chain_fourth_moments");
  const Eigen::Index d = p.dim();
  const Matrix<Scalar> a = Matrix<Scalar>::Identity(d, d) - Scalar(2) * eta * p.lambda();
  const Matrix<Scalar> b = Scalar(2) * eta * p.lambda();
  const auto& law = p.zeta_law();
  const Scalar k3 = Scalar(law.moment(3));
  const Scalar k4 = Scalar(law.moment(4) - 3.0);

  Vector<Scalar> mean = initial;
  Matrix<Scalar> power = Matrix<Scalar>::Identity(d, d);
  for (std::size_t n = 0; n < steps; ++n) {
    mean = a * mean;
  }
  Matrix<Scalar> cov = Matrix<Scalar>::Zero(d, d);
  Scalar third = Scalar(0);
  Scalar fourth = Scalar(0);
  for (std::size_t n = 0; n < steps; ++n) {
    const Matrix<Scalar> m = power * b;
    for (Eigen::Index i = 0; i < d; ++i) {
      const Scalar qi = p.q_gamma()(i);
      const auto col = m.col(i);
      const Scalar col2 = col.squaredNorm();
      cov.noalias() += qi * col * col.transpose();
      third += k3 * qi * std::sqrt(qi) * mean.dot(col) * col2;
      fourth += k4 * qi * qi * col2 * col2;
    }
    power = a * power;
  }

  ChainFourthMoments<Scalar> out;
  out.em = gaussian_fourth_moment(mean, cov);
  out.sgd = out.em + Scalar(4) * third + fourth;
  return out;
}

/// |E phi_1^4 - E phi~_1^4| after one step of the scalar chains
///   phi_1  = (1 - 2 eta lambda) phi0 + 2 eta lambda zeta,
///   phi~_1 = (1 - 2 eta lambda) phi0 + eta (2 lambda) xi,  xi ~ N(0, 1),
/// from the binomial expansion with the moments of zeta and xi.
inline double exact_one_step_gap(double phi0, double eta, double lambda, const ZetaLaw& law = {}) {
  const double x = (1.0 - 2.0 * eta * lambda) * phi0;
  const double b = 2.0 * eta * lambda;
  const double gauss[5] = {1.0, 0.0, 1.0, 0.0, 3.0};
  constexpr double binom[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
  double diff = 0.0;
  for (int j = 1; j <= 4; ++j) {
    diff += binom[j] * std::pow(x, 4 - j) * std::pow(b, j) * (law.moment(j) - gauss[j]);
  }
  return std::abs(diff);
}

}  // namespace smelab
