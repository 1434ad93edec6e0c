#include "ncsched/certificates.h"

#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "ncsched/errors.h"
#include "ncsched/rng.h"

namespace ncsched {

namespace {

constexpr int kKroneckerMaxDim = 8;

Matrix lyapunov_kronecker(const Matrix& F, const Matrix& Q) {
  const Eigen::Index d = F.rows();
  const Eigen::Index n = d * d;
  // Column-major vec: vec(F P F') = (F (x) F) vec(P).
  Matrix system = Matrix::Identity(n, n);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      const Eigen::Index row = r + c * d;
      for (Eigen::Index cc = 0; cc < d; ++cc) {
        for (Eigen::Index rr = 0; rr < d; ++rr) {
          system(row, rr + cc * d) -= F(c, cc) * F(r, rr);
        }
      }
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(Q.data(), n);
  const Vector vec_p = system.partialPivLu().solve(rhs);
  Matrix P = Eigen::Map<const Matrix>(vec_p.data(), d, d);
  return 0.5 * (P + P.transpose());
}

Matrix lyapunov_doubling(const Matrix& F, const Matrix& Q) {
  Matrix P = Q;
  Matrix power = F;
  for (int it = 0; it < 64; ++it) {
    const Matrix term = power * P * power.transpose();
    P += term;
    power = power * power;
    if (term.cwiseAbs().maxCoeff() <=
        1e-17 * P.cwiseAbs().maxCoeff()) {
      break;
    }
  }
  return 0.5 * (P + P.transpose());
}

}  // namespace

double CertificateScalars::stable_rate() const {
  return std::abs(std::log(lambda_s));
}
double CertificateScalars::unstable_rate() const {
  return std::abs(std::log(lambda_u));
}
double CertificateScalars::switch_cost() const {
  return std::log(mu_su) + std::log(mu_us);
}

std::string to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::kMaxBudget: return "max-budget";
    case SelectionRule::kMinLambdaS: return "min-lambda-s";
    case SelectionRule::kMinLambdaU: return "min-lambda-u";
  }
  return "unknown";
}

SelectionRule parse_selection_rule(const std::string& text) {
  if (text == "max-budget") return SelectionRule::kMaxBudget;
  if (text == "min-lambda-s") return SelectionRule::kMinLambdaS;
  if (text == "min-lambda-u") return SelectionRule::kMinLambdaU;
  throw ValidationError("unknown selection rule '" + text +
                        "' (expected max-budget, min-lambda-s, min-lambda-u)");
}

Matrix solve_discrete_lyapunov(const Matrix& F, const Matrix& Q) {
  if (F.rows() != F.cols() || Q.rows() != F.rows() || Q.cols() != F.cols()) {
    throw ValidationError("lyapunov: inconsistent dimensions");
  }
  if (!schur_stable(F).schur) {
    throw InfeasibleError("lyapunov: F is not Schur stable, no solution");
  }
  if (F.rows() <= kKroneckerMaxDim) return lyapunov_kronecker(F, Q);
  return lyapunov_doubling(F, Q);
}

std::vector<LyapunovPair> certify_stable_mode(const Matrix& A_s, int grid) {
  if (grid < 1) throw ValidationError("grid count must be >= 1");
  const double radius = spectral_radius(A_s);
  const Matrix identity = Matrix::Identity(A_s.rows(), A_s.cols());
  std::vector<LyapunovPair> out;
  for (int g = 1; g <= grid; ++g) {
    const double lambda = (2.0 * g - 1.0) / (2.0 * grid);
    const double scale = 1.0 / std::sqrt(lambda);
    // rho(A_s / sqrt(lambda)) = rho(A_s) / sqrt(lambda).
    if (!(radius * scale < 1.0 - kSchurMargin)) continue;
    // Transposed so that V(z) = z'Pz decreases along z -> A_s z.
    const Matrix F = (scale * A_s).transpose();
    out.push_back({solve_discrete_lyapunov(F, identity), lambda});
  }
  if (out.empty()) {
    throw InfeasibleError(radius < 1.0 - kSchurMargin
                              ? "closed-loop mode: no grid point lambda with "
                                "A_s / sqrt(lambda) Schur; raise the grid"
                              : "closed-loop mode is not Schur stable");
  }
  return out;
}

std::vector<LyapunovPair> certify_unstable_mode(const Matrix& A_u, int grid) {
  if (grid < 1) throw ValidationError("grid count must be >= 1");
  const double radius = spectral_radius(A_u);
  const Matrix identity = Matrix::Identity(A_u.rows(), A_u.cols());
  std::vector<LyapunovPair> out;
  // Largest eta first gives ascending lambda_u = 1 / eta^2.
  for (int j = grid; j >= 1; --j) {
    const double eta = (2.0 * j - 1.0) / (2.0 * grid);
    if (!(eta * radius < 1.0 - kSchurMargin)) continue;
    const Matrix F = (eta * A_u).transpose();
    out.push_back({solve_discrete_lyapunov(F, identity), 1.0 / (eta * eta)});
  }
  if (out.empty()) {
    throw InfeasibleError(
        "open-loop mode: no grid point eta with eta*A Schur; raise the grid");
  }
  return out;
}

double mu_estimate(const Matrix& P_from, const Matrix& P_to) {
  if (!is_positive_definite(P_from) || !is_positive_definite(P_to) ||
      P_from.rows() != P_to.rows()) {
    throw ValidationError("mu_estimate: inputs must be SPD of equal size");
  }
  return std::max(1.0, max_generalized_eigenvalue(P_from, P_to));
}

double loss_aware_budget(const CertificateScalars& s, int max_burst) {
  const double numerator = s.stable_rate() - s.switch_cost();
  return numerator / ((max_burst + 1) * std::log(s.lambda_u));
}

StabilityCertificate build_certificate(const PlantModel& plant, int grid,
                                       SelectionRule rule, int max_burst,
                                       Execution exec) {
  check_dimensions(plant);
  const Matrix A_s = closed_loop_matrix(plant);
  if (!schur_stable(A_s).schur) {
    throw ValidationError("plant " + std::to_string(plant.id) +
                          ": closed loop is not Schur stable");
  }
  const auto stable = certify_stable_mode(A_s, grid);
  const auto unstable = certify_unstable_mode(plant.A, grid);
  const PairChoice choice =
      select_certificate_pair(stable, unstable, rule, max_burst, exec);
  if (!choice.found()) {
    throw InfeasibleError("plant " + std::to_string(plant.id) +
                          ": uncertifiable at this grid resolution (G=" +
                          std::to_string(grid) + ")");
  }
  StabilityCertificate cert;
  cert.plant_id = plant.id;
  cert.stable = stable[static_cast<std::size_t>(choice.stable_index)];
  cert.unstable = unstable[static_cast<std::size_t>(choice.unstable_index)];
  cert.mu_su = choice.mu_su;
  cert.mu_us = choice.mu_us;
  cert.budget = choice.budget;
  return cert;
}

std::vector<CertificationOutcome> certify_all(
    std::span<const PlantModel> plants, int grid, SelectionRule rule,
    int max_burst, Execution exec) {
  const int n = static_cast<int>(plants.size());
  std::vector<CertificationOutcome> out(static_cast<std::size_t>(n));
  auto run_one = [&](int i, Execution inner) {
    auto& slot = out[static_cast<std::size_t>(i)];
    slot.plant_id = plants[static_cast<std::size_t>(i)].id;
    try {
      slot.certificate = build_certificate(plants[static_cast<std::size_t>(i)],
                                           grid, rule, max_burst, inner);
    } catch (const Error& e) {
      slot.error = e.what();
    }
  };
  if (exec == Execution::kSerial || n < parallel_threads()) {
    // Few plants: let the pair search use the threads instead.
    for (int i = 0; i < n; ++i) run_one(i, exec);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) run_one(i, Execution::kSerial);
  }
  return out;
}

CertificateCheck verify_certificate(const PlantModel& plant,
                                    const StabilityCertificate& cert,
                                    int samples, unsigned long long seed,
                                    double tol) {
  CertificateCheck check;
  const Matrix A_s = closed_loop_matrix(plant);
  const Matrix& A_u = plant.A;
  const Matrix& P_s = cert.stable.P;
  const Matrix& P_u = cert.unstable.P;
  const double ls = cert.stable.lambda;
  const double lu = cert.unstable.lambda;
  auto V = [](const Matrix& P, const Vector& z) { return z.dot(P * z); };

  Rng rng(seed);
  const Eigen::Index d = A_s.rows();
  for (int k = 0; k < samples; ++k) {
    Vector z(d);
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
    const double norm = z.norm();
    if (norm == 0.0) continue;
    z /= norm;
    const double vs = V(P_s, z);
    const double vu = V(P_u, z);
    check.max_decrease_violation = std::max(
        {check.max_decrease_violation, V(P_s, A_s * z) - ls * vs,
         V(P_u, A_u * z) - lu * vu});
    check.max_comparison_violation =
        std::max({check.max_comparison_violation, vu - cert.mu_su * vs,
                  vs - cert.mu_us * vu});
  }
  const bool ranges = ls > 0.0 && ls < 1.0 && lu >= 1.0 && cert.mu_su >= 1.0 &&
                      cert.mu_us >= 1.0 && is_symmetric(P_s, 1e-9) &&
                      is_symmetric(P_u, 1e-9) && is_positive_definite(P_s) &&
                      is_positive_definite(P_u);
  check.ok = ranges && check.max_decrease_violation <= tol &&
             check.max_comparison_violation <= tol;
  return check;
}

std::vector<CertificateScalars> scalars_of(
    std::span<const StabilityCertificate> certs) {
  std::vector<CertificateScalars> out;
  out.reserve(certs.size());
  for (const auto& c : certs) out.push_back(c.scalars());
  return out;
}

}  // namespace ncsched
