#pragma once

#include <span>
#include <string>
#include <vector>

#include "ncsched/linalg.h"

namespace ncsched {

/// One plant x(t+1) = A x(t) + B u(t) under state feedback u = K x.
///
/// K uses the additive convention: the closed-loop matrix is A + B K. This is
/// the negative of the textbook LQR gain (A - B K_lqr).
struct PlantModel {
  int id = 0;
  Matrix A;
  Matrix B;
  Matrix K;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
};

/// Shared network: N plants, M channels, at most `max_burst` consecutive
/// losses per channel.
struct NetworkSpec {
  int num_plants = 0;
  int capacity = 0;
  int max_burst = 1;
};

// Throws ValidationError unless A is square, B has A.rows() rows and K is
// B.cols() x A.rows().
void check_dimensions(const PlantModel& plant);

Matrix closed_loop_matrix(const PlantModel& plant);

// Mode matrices of the switched representation.
inline Matrix stable_mode_matrix(const PlantModel& plant) {
  return closed_loop_matrix(plant);
}
inline Matrix unstable_mode_matrix(const PlantModel& plant) { return plant.A; }

struct SpectralInfo {
  bool schur = false;
  double radius = 0.0;
};

/// Schur test with the boundary counted as unstable: schur iff
/// radius < 1 - kSchurMargin. Throws ValidationError on non-square input.
SpectralInfo schur_stable(const Matrix& F);

bool is_controllable(const Matrix& A, const Matrix& B);

struct DareSolution {
  Matrix P;
  Matrix K;  // additive convention, closed loop A + B K
  int iterations = 0;
};

/// Discrete algebraic Riccati equation by fixed-point iteration
///   P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA
/// started from P = Q, stopped when successive iterates differ by less than
/// 1e-12 in max-abs norm. Throws ValidationError for an uncontrollable pair or
/// invalid weights, NumericalError when 1e5 iterations are not enough.
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R);

inline Matrix dare_gain(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R) {
  return solve_dare(A, B, Q, R).K;
}

// Max-abs residual of the Riccati equation at P.
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& P);

struct PlantCheck {
  int id = 0;
  bool dimensions_ok = false;
  double open_loop_radius = 0.0;
  double closed_loop_radius = 0.0;
  bool open_loop_unstable = false;
  bool closed_loop_stable = false;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

struct ValidationReport {
  std::vector<PlantCheck> plants;
  std::vector<std::string> network_failures;

  bool ok() const;
  std::string summary() const;
};

/// Checks the standing assumptions: 0 < M < N, max_burst >= 1, N matches the
/// plant count, ids are 1..N, open loops non-Schur and closed loops Schur.
ValidationReport validate_network(std::span<const PlantModel> plants,
                                  const NetworkSpec& spec);

}  // namespace ncsched
