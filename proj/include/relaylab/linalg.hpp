#pragma once
// Small dense complex Hermitian linear algebra on stack-bounded Eigen types.
// Antenna counts stay <= kMaxDim, so no heap allocation occurs in hot loops.
// Tolerances throughout assume double precision at these sizes.

#include <Eigen/Dense>
#include <complex>

#include "relaylab/errors.hpp"

namespace relaylab {

inline constexpr int kMaxDim = 16;
inline constexpr double kSingularCond = 1e14;

using Complex = std::complex<double>;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::ColMajor, kMaxDim, kMaxDim>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor,
                           kMaxDim, 1>;

inline CMat gram(const CMat& a) { return a.adjoint() * a; }

// Eigenvalues descending, columns of `vectors` paired with them.
// Input must be Hermitian PSD (a gram matrix); eigenvalues within
// 1e-10 * lambda_max of zero are rank-deficiency residue and are clamped to
// exactly zero, so downstream rank counts can compare against 0.0.
struct Eigensystem {
  RVec values;
  CMat vectors;
};

inline Eigensystem hermitian_eig(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) {
    throw SingularSystem("hermitian eigendecomposition failed to converge");
  }
  const int n = static_cast<int>(a.rows());
  const double vmax = es.eigenvalues()(n - 1);
  const double floor = vmax > 0.0 ? 1e-10 * vmax : 0.0;
  Eigensystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvalues()(n - 1 - i);
    out.values(i) = v > floor ? v : 0.0;
    out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

// Degeneracy gate shared by every inversion site: eigenvalue (or singular
// value) extremes standing in for the condition number.
inline void require_invertible(double ev_min, double ev_max) {
  if (!(ev_min > 0.0) || !(ev_min * kSingularCond > ev_max)) {
    throw SingularSystem("condition number above 1e14");
  }
}

// Inverse of a Hermitian positive definite matrix with the degeneracy gate.
inline CMat inv_hpd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) {
    throw SingularSystem("hermitian eigendecomposition failed to converge");
  }
  const int n = static_cast<int>(a.rows());
  require_invertible(es.eigenvalues()(0), es.eigenvalues()(n - 1));
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

// Inverse square root of a Hermitian positive definite matrix.
inline CMat inv_sqrt_hpd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a);
  if (es.info() != Eigen::Success) {
    throw SingularSystem("hermitian eigendecomposition failed to converge");
  }
  const int n = static_cast<int>(a.rows());
  require_invertible(es.eigenvalues()(0), es.eigenvalues()(n - 1));
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().adjoint();
}

inline CMat hermitize(const CMat& a) { return (a + a.adjoint()) / 2.0; }

}  // namespace relaylab
