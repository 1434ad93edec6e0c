#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncsched/execution.h"
#include "ncsched/linalg.h"
#include "ncsched/plant_model.h"

namespace ncsched {

/// Quadratic Lyapunov-like function V(z) = z'Pz with rate `lambda` for a mode
/// matrix F, meaning V(Fz) <= lambda V(z), i.e. F'PF - lambda P <= 0.
struct LyapunovPair {
  Matrix P;
  double lambda = 0.0;
};

/// The four scalars that the graph weights and the contraction functional
/// consume. Indexed by plant (id - 1) wherever a span of them is passed.
struct CertificateScalars {
  double lambda_s = 0.0;
  double lambda_u = 0.0;
  double mu_su = 1.0;  // V_u <= mu_su V_s
  double mu_us = 1.0;  // V_s <= mu_us V_u

  double stable_rate() const;    // |ln lambda_s|
  double unstable_rate() const;  // |ln lambda_u|
  double switch_cost() const;    // ln mu_su + ln mu_us
};

struct StabilityCertificate {
  int plant_id = 0;
  LyapunovPair stable;
  LyapunovPair unstable;
  double mu_su = 1.0;
  double mu_us = 1.0;
  double budget = 0.0;  // loss-aware budget at the max_burst it was built for

  CertificateScalars scalars() const {
    return {stable.lambda, unstable.lambda, mu_su, mu_us};
  }
};

enum class SelectionRule { kMaxBudget, kMinLambdaS, kMinLambdaU };

std::string to_string(SelectionRule rule);
SelectionRule parse_selection_rule(const std::string& text);

inline constexpr int kDefaultGrid = 1000;

/// Unique P with F P F' - P = -Q. Kronecker solve for dimension <= 8,
/// doubling summation of sum_k F^k Q F'^k above that. Throws InfeasibleError
/// when F is not Schur.
Matrix solve_discrete_lyapunov(const Matrix& F, const Matrix& Q);

/// Grid candidates for the closed-loop mode. Midpoints (2g-1)/(2G) of (0,1)
/// are feasible when A_s / sqrt(lambda) is Schur; returned by lambda
/// ascending. Throws InfeasibleError when no midpoint qualifies.
std::vector<LyapunovPair> certify_stable_mode(const Matrix& A_s, int grid);

/// Grid candidates for the open-loop mode. For each midpoint eta of (0,1)
/// with eta A_u Schur, lambda_u = 1/eta^2. Returned by lambda ascending.
/// Throws InfeasibleError when no eta qualifies.
std::vector<LyapunovPair> certify_unstable_mode(const Matrix& A_u, int grid);

/// Tight comparability constant: the smallest mu with V_to <= mu V_from,
/// clamped to >= 1.
double mu_estimate(const Matrix& P_from, const Matrix& P_to);

/// (|ln lambda_s| - ln mu_su - ln mu_us) / ((ell + 1) ln lambda_u).
double loss_aware_budget(const CertificateScalars& s, int max_burst);

/// Result of the grid pair search: indices into the stable/unstable
/// candidate lists.
struct PairChoice {
  int stable_index = -1;
  int unstable_index = -1;
  double mu_su = 1.0;
  double mu_us = 1.0;
  double budget = 0.0;
  long long pairs_examined = 0;

  bool found() const { return stable_index >= 0; }
};

/// Searches every (stable, unstable) candidate pair for the one preferred by
/// `rule` among pairs whose budget numerator is positive. Ties go to the
/// smaller lambda_u, then the smaller lambda_s.
PairChoice select_certificate_pair(std::span<const LyapunovPair> stable,
                                   std::span<const LyapunovPair> unstable,
                                   SelectionRule rule, int max_burst,
                                   Execution exec = Execution::kParallel);

/// Grid relaxation for one plant. Throws InfeasibleError when no grid pair
/// yields a positive budget numerator.
StabilityCertificate build_certificate(const PlantModel& plant, int grid,
                                       SelectionRule rule, int max_burst,
                                       Execution exec = Execution::kParallel);

/// Certifies every plant. Output is ordered like the input regardless of
/// scheduling. Failed plants carry the error message instead.
struct CertificationOutcome {
  int plant_id = 0;
  std::optional<StabilityCertificate> certificate;
  std::string error;
};

std::vector<CertificationOutcome> certify_all(
    std::span<const PlantModel> plants, int grid, SelectionRule rule,
    int max_burst, Execution exec = Execution::kParallel);

struct CertificateCheck {
  double max_decrease_violation = 0.0;    // max of V_p(A_p z) - lambda_p V_p(z)
  double max_comparison_violation = 0.0;  // max of V_q(z) - mu_pq V_p(z)
  bool ok = false;
};

/// Samples `samples` vectors z (unit-normalized) from a seeded generator and
/// checks the decrease and comparison inequalities in both modes and both
/// directions, plus the scalar ranges.
CertificateCheck verify_certificate(const PlantModel& plant,
                                    const StabilityCertificate& cert,
                                    int samples, unsigned long long seed,
                                    double tol = 1e-9);

std::vector<CertificateScalars> scalars_of(
    std::span<const StabilityCertificate> certs);

}  // namespace ncsched
