// Grid pair search over (lambda_s, lambda_u) candidates. The OpenMP kernel
// splits the stable-candidate axis across threads; the serial version is the
// reference it is tested against.

#include <array>
#include <cmath>
#include <limits>

#include <omp.h>

#include "ncsched/certificates.h"
#include "ncsched/errors.h"

namespace ncsched {

namespace {

struct Candidate {
  int g = -1;
  int j = -1;
  double budget = -std::numeric_limits<double>::infinity();
  double mu_su = 1.0;
  double mu_us = 1.0;
};

// Strict total order on (g, j); `a` preferred over `b`.
bool better(const Candidate& a, const Candidate& b, SelectionRule rule) {
  if (b.g < 0) return a.g >= 0;
  if (a.g < 0) return false;
  switch (rule) {
    case SelectionRule::kMaxBudget:
      if (a.budget != b.budget) return a.budget > b.budget;
      if (a.j != b.j) return a.j < b.j;
      return a.g < b.g;
    case SelectionRule::kMinLambdaS:
      if (a.g != b.g) return a.g < b.g;
      if (a.budget != b.budget) return a.budget > b.budget;
      return a.j < b.j;
    case SelectionRule::kMinLambdaU:
      if (a.j != b.j) return a.j < b.j;
      if (a.budget != b.budget) return a.budget > b.budget;
      return a.g < b.g;
  }
  return false;
}

// Per-candidate data: P and the inverse Cholesky factor W = L^-1 (P = L L'),
// so that lambda_max(P_from^-1 P_to) = lambda_max(W_from P_to W_from').
struct Prepared {
  std::vector<Matrix> P;
  std::vector<Matrix> W;
  std::vector<double> log_lambda;
  // Packed 2x2 fast path: P = [a b; b c], W = [w00 0; w10 w11].
  std::vector<std::array<double, 3>> p2;
  std::vector<std::array<double, 3>> w2;
};

Prepared prepare(std::span<const LyapunovPair> pairs) {
  Prepared out;
  for (const auto& pair : pairs) {
    Eigen::LLT<Matrix> llt(pair.P);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("candidate Lyapunov matrix is not positive definite");
    }
    const Eigen::Index d = pair.P.rows();
    Matrix W = llt.matrixL().solve(Matrix::Identity(d, d));
    out.log_lambda.push_back(std::log(pair.lambda));
    if (d == 2) {
      out.p2.push_back({pair.P(0, 0), pair.P(1, 0), pair.P(1, 1)});
      out.w2.push_back({W(0, 0), W(1, 0), W(1, 1)});
    }
    out.P.push_back(pair.P);
    out.W.push_back(std::move(W));
  }
  return out;
}

inline double max_eig_congruence2(const std::array<double, 3>& w,
                                  const std::array<double, 3>& p) {
  const double w00 = w[0], w10 = w[1], w11 = w[2];
  const double a = p[0], b = p[1], c = p[2];
  const double s00 = w00 * w00 * a;
  const double s01 = w00 * (a * w10 + b * w11);
  const double s11 = w10 * w10 * a + 2.0 * w10 * w11 * b + w11 * w11 * c;
  return 0.5 * (s00 + s11) + std::hypot(0.5 * (s00 - s11), s01);
}

double max_eig_congruence(const Matrix& W, const Matrix& P) {
  const Matrix S = W * P * W.transpose();
  return max_symmetric_eigenvalue(0.5 * (S + S.transpose()));
}

struct SearchContext {
  const Prepared& stable;
  const Prepared& unstable;
  bool packed2;
  int max_burst;
};

// Scores every unstable candidate against stable candidate g.
void scan_row(const SearchContext& ctx, int g, SelectionRule rule,
              Candidate& best, long long& examined) {
  const int nu = static_cast<int>(ctx.unstable.log_lambda.size());
  const double stable_rate = std::abs(ctx.stable.log_lambda[g]);
  for (int j = 0; j < nu; ++j) {
    double mu_su, mu_us;
    if (ctx.packed2) {
      mu_su = max_eig_congruence2(ctx.stable.w2[g], ctx.unstable.p2[j]);
      mu_us = max_eig_congruence2(ctx.unstable.w2[j], ctx.stable.p2[g]);
    } else {
      mu_su = max_eig_congruence(ctx.stable.W[g], ctx.unstable.P[j]);
      mu_us = max_eig_congruence(ctx.unstable.W[j], ctx.stable.P[g]);
    }
    mu_su = std::max(1.0, mu_su);
    mu_us = std::max(1.0, mu_us);
    ++examined;
    const double numerator = stable_rate - std::log(mu_su) - std::log(mu_us);
    if (!(numerator > 0.0)) continue;
    const double denominator =
        (ctx.max_burst + 1) * ctx.unstable.log_lambda[j];
    const double budget = numerator / denominator;
    if (!std::isfinite(budget)) continue;
    const Candidate cand{g, j, budget, mu_su, mu_us};
    if (better(cand, best, rule)) best = cand;
  }
}

PairChoice to_choice(const Candidate& c, long long examined) {
  PairChoice out;
  out.stable_index = c.g;
  out.unstable_index = c.j;
  out.mu_su = c.mu_su;
  out.mu_us = c.mu_us;
  out.budget = c.g >= 0 ? c.budget : 0.0;
  out.pairs_examined = examined;
  return out;
}

PairChoice search_serial(const SearchContext& ctx, SelectionRule rule) {
  Candidate best;
  long long examined = 0;
  const int ns = static_cast<int>(ctx.stable.log_lambda.size());
  for (int g = 0; g < ns; ++g) scan_row(ctx, g, rule, best, examined);
  return to_choice(best, examined);
}

PairChoice search_parallel(const SearchContext& ctx, SelectionRule rule) {
  Candidate best;
  long long examined = 0;
  const int ns = static_cast<int>(ctx.stable.log_lambda.size());
#pragma omp parallel
  {
    Candidate local;
    long long local_examined = 0;
#pragma omp for schedule(static) nowait
    for (int g = 0; g < ns; ++g) scan_row(ctx, g, rule, local, local_examined);
#pragma omp critical(ncsched_pair_search)
    {
      // `better` is a total order, so merge order does not matter.
      if (better(local, best, rule)) best = local;
      examined += local_examined;
    }
  }
  return to_choice(best, examined);
}

}  // namespace

PairChoice select_certificate_pair(std::span<const LyapunovPair> stable,
                                   std::span<const LyapunovPair> unstable,
                                   SelectionRule rule, int max_burst,
                                   Execution exec) {
  if (stable.empty() || unstable.empty()) return {};
  const Prepared ps = prepare(stable);
  const Prepared pu = prepare(unstable);
  const SearchContext ctx{ps, pu, stable.front().P.rows() == 2, max_burst};
  return exec == Execution::kSerial ? search_serial(ctx, rule)
                                    : search_parallel(ctx, rule);
}

}  // namespace ncsched
