#include "ncsched/plant_model.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "ncsched/errors.h"

namespace ncsched {

namespace {

constexpr double kDareTolerance = 1e-12;
constexpr int kDareMaxIterations = 100000;

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void check_dimensions(const PlantModel& plant) {
  const std::string who = "plant " + std::to_string(plant.id) + ": ";
  if (plant.A.rows() == 0 || plant.A.rows() != plant.A.cols()) {
    throw ValidationError(who + "A must be square and nonempty, got " +
                          dims(plant.A));
  }
  if (plant.B.rows() != plant.A.rows() || plant.B.cols() == 0) {
    throw ValidationError(who + "B must have " +
                          std::to_string(plant.A.rows()) + " rows, got " +
                          dims(plant.B));
  }
  if (plant.K.rows() != plant.B.cols() || plant.K.cols() != plant.A.rows()) {
    throw ValidationError(who + "K must be " + std::to_string(plant.B.cols()) +
                          "x" + std::to_string(plant.A.rows()) + ", got " +
                          dims(plant.K));
  }
}

Matrix closed_loop_matrix(const PlantModel& plant) {
  check_dimensions(plant);
  return plant.A + plant.B * plant.K;
}

SpectralInfo schur_stable(const Matrix& F) {
  const double radius = spectral_radius(F);
  return {radius < 1.0 - kSchurMargin, radius};
}

bool is_controllable(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  if (n == 0) return true;
  Matrix ctrb(n, n * B.cols());
  Matrix block = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(ctrb);
  qr.setThreshold(1e-10);
  return qr.rank() == n;
}

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                     const Matrix& R, const Matrix& P) {
  const Matrix BtP = B.transpose() * P;
  const Matrix gain = (R + BtP * B).ldlt().solve(BtP * A);
  const Matrix next = Q + A.transpose() * P * A - (BtP * A).transpose() * gain;
  return (next - P).cwiseAbs().maxCoeff();
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R) {
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != m || R.cols() != m) {
    throw ValidationError("dare: inconsistent dimensions");
  }
  if (!is_symmetric(Q, 1e-10) || !is_symmetric(R, 1e-10)) {
    throw ValidationError("dare: Q and R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> q_eig(Q, Eigen::EigenvaluesOnly);
  if (q_eig.eigenvalues().minCoeff() < -1e-12) {
    throw ValidationError("dare: Q must be positive semidefinite");
  }
  if (!is_positive_definite(R)) {
    throw ValidationError("dare: R must be positive definite");
  }
  if (!is_controllable(A, B)) {
    throw ValidationError("dare: (A, B) is not controllable");
  }

  Matrix P = Q;
  for (int it = 1; it <= kDareMaxIterations; ++it) {
    const Matrix BtP = B.transpose() * P;
    const Matrix gain = (R + BtP * B).ldlt().solve(BtP * A);
    Matrix next = Q + A.transpose() * P * A - (BtP * A).transpose() * gain;
    next = 0.5 * (next + next.transpose());
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (diff < kDareTolerance) {
      const Matrix BtPf = B.transpose() * P;
      Matrix K = -(R + BtPf * B).ldlt().solve(BtPf * A);
      return {P, K, it};
    }
  }
  throw NumericalError("dare: no convergence within 1e5 iterations");
}

bool ValidationReport::ok() const {
  if (!network_failures.empty()) return false;
  return std::all_of(plants.begin(), plants.end(),
                     [](const PlantCheck& c) { return c.ok(); });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& f : network_failures) os << "network: " << f << "\n";
  for (const auto& p : plants) {
    os << "plant " << p.id << ": "
       << (p.ok() ? "ok" : "FAIL") << " (rho(A)=" << p.open_loop_radius
       << ", rho(A+BK)=" << p.closed_loop_radius << ")";
    for (const auto& f : p.failures) os << "; " << f;
    os << "\n";
  }
  return os.str();
}

ValidationReport validate_network(std::span<const PlantModel> plants,
                                  const NetworkSpec& spec) {
  ValidationReport report;
  const int n = static_cast<int>(plants.size());
  if (spec.num_plants != n) {
    report.network_failures.push_back(
        "N = " + std::to_string(spec.num_plants) + " but " +
        std::to_string(n) + " plants were supplied");
  }
  if (!(spec.capacity > 0 && spec.capacity < n)) {
    report.network_failures.push_back("capacity must satisfy M < N (and M > 0)");
  }
  if (spec.max_burst < 1) {
    report.network_failures.push_back("max burst length must be >= 1");
  }
  std::set<int> ids;
  for (const auto& p : plants) ids.insert(p.id);
  if (static_cast<int>(ids.size()) != n || (n > 0 && (*ids.begin() != 1 ||
                                                      *ids.rbegin() != n))) {
    report.network_failures.push_back("plant ids must be exactly 1..N");
  }

  for (const auto& plant : plants) {
    PlantCheck check;
    check.id = plant.id;
    try {
      check_dimensions(plant);
      check.dimensions_ok = true;
    } catch (const ValidationError& e) {
      check.failures.emplace_back(e.what());
      report.plants.push_back(std::move(check));
      continue;
    }
    check.open_loop_radius = spectral_radius(plant.A);
    check.closed_loop_radius = spectral_radius(closed_loop_matrix(plant));
    check.open_loop_unstable = check.open_loop_radius > 1.0 - kSchurMargin;
    check.closed_loop_stable = check.closed_loop_radius < 1.0 - kSchurMargin;
    if (!check.open_loop_unstable) {
      check.failures.emplace_back("open loop non-Schur check failed");
    }
    if (!check.closed_loop_stable) {
      check.failures.emplace_back("closed loop Schur check failed");
    }
    report.plants.push_back(std::move(check));
  }
  return report;
}

}  // namespace ncsched
