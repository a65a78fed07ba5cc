#pragma once

#include <Eigen/Dense>
#include <complex>

#include "enaqt/errors.hpp"

namespace enaqt {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Hermitian within a relative tolerance of the largest entry.
inline bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  return max_abs(a - a.adjoint()) <= rel_tol * (scale > 0.0 ? scale : 1.0);
}

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-10) {
  if (u.rows() != u.cols()) return false;
  const ComplexMatrix g = u.adjoint() * u;
  return max_abs(g - ComplexMatrix::Identity(u.rows(), u.cols())) <= tol;
}

// exp(-i * scale * A) for Hermitian A, via eigendecomposition. The result is
// unitary to machine precision for any scale, which matters for the long
// products of step propagators built on top of this.
inline ComplexMatrix hermitian_expm(const ComplexMatrix& a, double scale) {
  if (a.rows() != a.cols()) throw NumericError("hermitian_expm: matrix is not square");
  if (!is_hermitian(a)) throw NumericError("hermitian_expm: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
  if (es.info() != Eigen::Success) throw NumericError("hermitian_expm: eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  ComplexVector phases(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    phases[k] = std::polar(1.0, -scale * lam[k]);
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace enaqt
