#pragma once

#include <Eigen/Dense>

namespace ncsched {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Margin used for every "strictly inside the unit disk" decision.
inline constexpr double kSchurMargin = 1e-9;

double spectral_radius(const Matrix& F);

// Largest eigenvalue of a symmetric matrix (only the lower triangle is read).
double max_symmetric_eigenvalue(const Matrix& S);

// Largest generalized eigenvalue of (P_to, P_from), both symmetric positive
// definite. Throws ValidationError when P_from is not positive definite.
double max_generalized_eigenvalue(const Matrix& P_from, const Matrix& P_to);

bool is_symmetric(const Matrix& S, double tol);
bool is_positive_definite(const Matrix& S);

}  // namespace ncsched
