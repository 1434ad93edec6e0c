#include "ncsched/rational_lp.h"

#include <cmath>
#include <optional>

#include "ncsched/errors.h"

namespace ncsched::lp {

namespace {

using boost::multiprecision::cpp_int;

class Tableau {
 public:
  // Rows hold [coefficients | rhs]; `basis[r]` is the basic column of row r.
  std::vector<std::vector<Rational>> rows;
  std::vector<int> basis;
  std::vector<bool> eligible;
  int num_cols = 0;
  int pivots = 0;

  void pivot(int r, int c) {
    auto& pr = rows[static_cast<std::size_t>(r)];
    const Rational inv = 1 / pr[static_cast<std::size_t>(c)];
    for (auto& v : pr) v *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(i) == r) continue;
      const Rational f = rows[i][static_cast<std::size_t>(c)];
      if (f == 0) continue;
      for (std::size_t j = 0; j < pr.size(); ++j) {
        if (pr[j] != 0) rows[i][j] -= f * pr[j];
      }
    }
    basis[static_cast<std::size_t>(r)] = c;
    ++pivots;
  }

  const Rational& rhs(std::size_t r) const { return rows[r].back(); }

  // Minimizes cost'x over the current basis; false when unbounded.
  bool optimize(const std::vector<Rational>& cost) {
    const std::size_t m = rows.size();
    while (true) {
      // Reduced costs d_j = c_j - sum_r c_{basis r} a_rj.
      int entering = -1;
      for (int j = 0; j < num_cols && entering < 0; ++j) {
        if (!eligible[static_cast<std::size_t>(j)]) continue;
        Rational d = cost[static_cast<std::size_t>(j)];
        for (std::size_t r = 0; r < m; ++r) {
          const Rational& a = rows[r][static_cast<std::size_t>(j)];
          if (a != 0) d -= cost[static_cast<std::size_t>(basis[r])] * a;
        }
        if (d < 0) entering = j;
      }
      if (entering < 0) return true;

      int leaving = -1;
      Rational best_ratio;
      for (std::size_t r = 0; r < m; ++r) {
        const Rational& a = rows[r][static_cast<std::size_t>(entering)];
        if (a <= 0) continue;
        const Rational ratio = rhs(r) / a;
        if (leaving < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis[r] < basis[static_cast<std::size_t>(leaving)])) {
          leaving = static_cast<int>(r);
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }
};

}  // namespace

Rational exact(double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("exact: value is not finite");
  }
  if (value == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  // mantissa * 2^53 is an integer for every finite double.
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  cpp_int numerator = scaled;
  const int shift = exponent - 53;
  if (shift >= 0) return Rational(numerator << shift);
  return Rational(numerator, cpp_int(1) << -shift);
}

void Problem::add_row(std::vector<Rational> row, Rational rhs) {
  if (static_cast<int>(row.size()) != num_vars) {
    throw ValidationError("lp: row width does not match num_vars");
  }
  A.push_back(std::move(row));
  b.push_back(std::move(rhs));
}

Solution solve(const Problem& problem) {
  const int n = problem.num_vars;
  const int m = static_cast<int>(problem.A.size());
  if (static_cast<int>(problem.b.size()) != m ||
      (!problem.c.empty() && static_cast<int>(problem.c.size()) != n)) {
    throw ValidationError("lp: inconsistent problem dimensions");
  }

  // Columns: x (n), slacks (m), artificials (one per negative-rhs row).
  int num_art = 0;
  for (const auto& v : problem.b) num_art += v < 0 ? 1 : 0;
  const int cols = n + m + num_art;

  Tableau t;
  t.num_cols = cols;
  t.rows.assign(static_cast<std::size_t>(m),
                std::vector<Rational>(static_cast<std::size_t>(cols) + 1));
  t.basis.assign(static_cast<std::size_t>(m), -1);
  t.eligible.assign(static_cast<std::size_t>(cols), true);
  int art = n + m;
  for (int r = 0; r < m; ++r) {
    auto& row = t.rows[static_cast<std::size_t>(r)];
    const bool flip = problem.b[static_cast<std::size_t>(r)] < 0;
    const int sign = flip ? -1 : 1;
    for (int j = 0; j < n; ++j) {
      row[static_cast<std::size_t>(j)] =
          sign * problem.A[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
    }
    row[static_cast<std::size_t>(n + r)] = sign;
    row.back() = sign * problem.b[static_cast<std::size_t>(r)];
    if (flip) {
      row[static_cast<std::size_t>(art)] = 1;
      t.basis[static_cast<std::size_t>(r)] = art++;
    } else {
      t.basis[static_cast<std::size_t>(r)] = n + r;
    }
  }

  Solution out;
  if (num_art > 0) {
    std::vector<Rational> phase1(static_cast<std::size_t>(cols));
    for (int j = n + m; j < cols; ++j) phase1[static_cast<std::size_t>(j)] = 1;
    if (!t.optimize(phase1)) {
      throw NumericalError("lp: phase one reported unbounded");
    }
    Rational infeasibility = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.basis[r] >= n + m) infeasibility += t.rhs(r);
    }
    if (infeasibility > 0) {
      out.status = Status::kInfeasible;
      out.pivots = t.pivots;
      return out;
    }
    // Drive zero-valued artificials out of the basis; drop redundant rows.
    for (std::size_t r = 0; r < t.rows.size();) {
      if (t.basis[r] < n + m) {
        ++r;
        continue;
      }
      int col = -1;
      for (int j = 0; j < n + m && col < 0; ++j) {
        if (t.rows[r][static_cast<std::size_t>(j)] != 0) col = j;
      }
      if (col >= 0) {
        t.pivot(static_cast<int>(r), col);
        ++r;
      } else {
        t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(r));
        t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(r));
      }
    }
    for (int j = n + m; j < cols; ++j) t.eligible[static_cast<std::size_t>(j)] = false;
  }

  std::vector<Rational> cost(static_cast<std::size_t>(cols));
  for (std::size_t j = 0; j < problem.c.size(); ++j) cost[j] = problem.c[j];
  if (!t.optimize(cost)) {
    out.status = Status::kUnbounded;
    out.pivots = t.pivots;
    return out;
  }

  out.status = Status::kOptimal;
  out.x.assign(static_cast<std::size_t>(n), Rational(0));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.basis[r] < n) out.x[static_cast<std::size_t>(t.basis[r])] = t.rhs(r);
  }
  out.objective = 0;
  for (std::size_t j = 0; j < problem.c.size(); ++j) {
    out.objective += problem.c[j] * out.x[j];
  }
  out.pivots = t.pivots;
  return out;
}

}  // namespace ncsched::lp
