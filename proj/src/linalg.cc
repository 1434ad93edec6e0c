#include "ncsched/linalg.h"

#include <algorithm>
#include <cmath>

#include "ncsched/errors.h"

namespace ncsched {

double spectral_radius(const Matrix& F) {
  if (F.rows() != F.cols()) {
    throw ValidationError("spectral radius of a non-square matrix");
  }
  if (F.size() == 0) return 0.0;
  if (F.rows() == 1) return std::abs(F(0, 0));
  if (F.rows() == 2) {
    // Characteristic polynomial z^2 - tr z + det.
    const double tr = F(0, 0) + F(1, 1);
    const double det = F(0, 0) * F(1, 1) - F(0, 1) * F(1, 0);
    const double disc = 0.25 * tr * tr - det;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      return std::max(std::abs(0.5 * tr + root), std::abs(0.5 * tr - root));
    }
    // Complex pair with modulus sqrt(det).
    return std::sqrt(det);
  }
  Eigen::EigenSolver<Matrix> solver(F, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double max_symmetric_eigenvalue(const Matrix& S) {
  if (S.rows() == 1) return S(0, 0);
  if (S.rows() == 2) {
    const double a = S(0, 0), b = S(1, 0), c = S(1, 1);
    const double half_diff = 0.5 * (a - c);
    return 0.5 * (a + c) + std::hypot(half_diff, b);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(S, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double max_generalized_eigenvalue(const Matrix& P_from, const Matrix& P_to) {
  Eigen::LLT<Matrix> llt(P_from);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("matrix is not positive definite");
  }
  // L^-1 P_to L^-T is similar to P_from^-1 P_to.
  const Matrix half = llt.matrixL().solve(P_to);
  const Matrix S = llt.matrixL().solve(half.transpose());
  return max_symmetric_eigenvalue(0.5 * (S + S.transpose()));
}

bool is_symmetric(const Matrix& S, double tol) {
  if (S.rows() != S.cols()) return false;
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_definite(const Matrix& S) {
  if (S.rows() != S.cols() || S.size() == 0) return false;
  Eigen::LLT<Matrix> llt(S);
  return llt.info() == Eigen::Success;
}

}  // namespace ncsched
