#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "smelab/coeffspace.hpp"
#include "smelab/errors.hpp"
#include "smelab/rng.hpp"

namespace smelab {

/// Covariance q with a square-root factor s, s * s^T = q.
template <typename Scalar>
struct CovFactor {
  Matrix<Scalar> q;
  Matrix<Scalar> s;
  /// Sum of |mu| over negative eigenvalues zeroed while factorizing.
  Scalar clipped_mass = Scalar(0);

  Eigen::Index dim() const { return q.rows(); }
};

template <typename Scalar>
struct PsdTolerances {
  Scalar asymmetry = Scalar(1e-10);
  Scalar clip_budget = Scalar(1e-8);
};

/// Symmetric PSD square root through the symmetric eigendecomposition. Small
/// negative eigenvalues (roundoff) are clipped to zero; anything beyond the
/// clip budget means the input is not a covariance and throws.
template <typename Derived>
CovFactor<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& q_in,
                                             PsdTolerances<typename Derived::Scalar> tol = {}) {
  using Scalar = typename Derived::Scalar;
  if (q_in.rows() != q_in.cols()) throw DimensionError("psd_sqrt: matrix must be square");

  const Matrix<Scalar> q_raw = q_in;
  const Scalar norm = q_raw.norm();
  const Scalar asym = (q_raw - q_raw.transpose()).norm();
  if (asym > tol.asymmetry * norm) {
    throw NumericalError("psd_sqrt: asymmetric input (relative asymmetry " +
                         std::to_string(double(asym / norm)) + ")");
  }

  CovFactor<Scalar> f;
  f.q = Scalar(0.5) * (q_raw + q_raw.transpose());
  if (f.q.size() == 0) {
    f.s = f.q;
    return f;
  }

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(f.q);
  if (eig.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");

  Vector<Scalar> root = eig.eigenvalues();
  // Eigenvalues below the solver's roundoff level are zero.
  const Scalar noise_floor =
      Scalar(root.size()) * std::numeric_limits<Scalar>::epsilon() * root.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    if (root(i) < Scalar(0)) f.clipped_mass += -root(i);
    if (root(i) <= noise_floor) {
      root(i) = Scalar(0);
    } else {
      root(i) = std::sqrt(root(i));
    }
  }
  if (f.clipped_mass > tol.clip_budget * norm) {
    throw NumericalError("psd_sqrt: covariance is not PSD (negative eigenvalue mass " +
                         std::to_string(double(f.clipped_mass)) + ")");
  }
  const auto& u = eig.eigenvectors();
  f.s.noalias() = u * root.asDiagonal() * u.transpose();
  return f;
}

/// s * xi with xi ~ N(0, I); mean zero, covariance q.
template <typename Scalar>
CoeffVec<Scalar> draw_noise(const CovFactor<Scalar>& f, RngStream& rng) {
  Vector<Scalar> xi(f.s.cols());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = Scalar(rng.normal());
  return f.s * xi;
}

}  // namespace smelab
