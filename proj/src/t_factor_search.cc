// T-factor search: exact-rational LP (optionally box-bounded with branch and
// bound) and brute-force enumeration with an OpenMP kernel whose first hit in
// lexicographic order matches the serial reference.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ncsched/cycle_synthesis.h"
#include "ncsched/errors.h"
#include "ncsched/rational_lp.h"

namespace ncsched {

namespace {

using lp::Rational;
using boost::multiprecision::cpp_int;

constexpr long long kDefaultTMax = 10;
constexpr double kMaxEnumeration = 1e9;
constexpr long long kEnumBlock = 1 << 16;
constexpr int kMaxRoundingScale = 64;

struct Coefficients {
  std::vector<int> plants;
  // coef[p][k]: contribution per unit T_k for plants[p].
  std::vector<std::vector<double>> coef;
};

Coefficients build_coefficients(std::span<const Vertex> vertices,
                                std::span<const int> plants,
                                std::span<const CertificateScalars> certs,
                                int max_burst) {
  Coefficients out;
  if (plants.empty()) {
    for (int i = 1; i <= static_cast<int>(certs.size()); ++i) {
      out.plants.push_back(i);
    }
  } else {
    out.plants.assign(plants.begin(), plants.end());
  }
  for (int plant : out.plants) {
    if (plant < 1 || plant > static_cast<int>(certs.size())) {
      throw ValidationError("missing certificate for plant " +
                            std::to_string(plant));
    }
    std::vector<double> row;
    row.reserve(vertices.size());
    for (Vertex v : vertices) {
      row.push_back(zbar_coefficient(v, plant,
                                     certs[static_cast<std::size_t>(plant - 1)],
                                     max_burst));
    }
    out.coef.push_back(std::move(row));
  }
  return out;
}

bool strictly_contractive(const Coefficients& c,
                          const std::vector<long long>& t) {
  for (const auto& row : c.coef) {
    double z = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      z += row[k] * static_cast<double>(t[k]);
    }
    if (!(z < -kContractionMargin)) return false;
  }
  return true;
}

// LP over T in [lo, hi] (hi empty = unbounded above) with zbar <= -margin.
// Solved in y = T - lo >= 0, minimizing sum(y).
lp::Solution solve_relaxation(const std::vector<std::vector<Rational>>& coef,
                              const Rational& margin,
                              const std::vector<long long>& lo,
                              const std::vector<long long>& hi) {
  const int n = static_cast<int>(lo.size());
  lp::Problem problem;
  problem.num_vars = n;
  problem.c.assign(static_cast<std::size_t>(n), Rational(1));
  for (const auto& row : coef) {
    Rational rhs = -margin;
    for (int k = 0; k < n; ++k) rhs -= row[static_cast<std::size_t>(k)] * lo[static_cast<std::size_t>(k)];
    problem.add_row(row, rhs);
  }
  for (int k = 0; k < n && !hi.empty(); ++k) {
    std::vector<Rational> row(static_cast<std::size_t>(n));
    row[static_cast<std::size_t>(k)] = 1;
    problem.add_row(std::move(row),
                    Rational(hi[static_cast<std::size_t>(k)] -
                             lo[static_cast<std::size_t>(k)]));
  }
  lp::Solution sol = lp::solve(problem);
  if (sol.status == lp::Status::kOptimal) {
    for (int k = 0; k < n; ++k) sol.x[static_cast<std::size_t>(k)] += lo[static_cast<std::size_t>(k)];
  }
  return sol;
}

std::vector<std::vector<Rational>> exact_coefficients(const Coefficients& c) {
  std::vector<std::vector<Rational>> out;
  for (const auto& row : c.coef) {
    std::vector<Rational> r;
    for (double v : row) r.push_back(lp::exact(v));
    out.push_back(std::move(r));
  }
  return out;
}

bool is_integral(const Rational& v) {
  return boost::multiprecision::denominator(v) == 1;
}

long long to_ll(const cpp_int& v) {
  if (v > std::numeric_limits<long long>::max()) {
    throw NumericalError("T-factor does not fit in 64 bits");
  }
  return static_cast<long long>(v);
}

cpp_int ceil_of(const Rational& v) {
  const cpp_int num = boost::multiprecision::numerator(v);
  const cpp_int den = boost::multiprecision::denominator(v);
  cpp_int q = num / den;
  if (q * den != num && num > 0) q += 1;
  return q;
}

// Integer T from a rational LP point T* with zbar(T*) <= -margin: first try
// ceil(q T*) for small q, then the q for which rounding up cannot use more
// than the slack, q > (sum of positive coefficients) / slack for every plant.
std::optional<std::vector<long long>> integerize(
    const Coefficients& c, const std::vector<Rational>& point) {
  if (std::all_of(point.begin(), point.end(), is_integral)) {
    std::vector<long long> t;
    for (const auto& v : point) t.push_back(to_ll(boost::multiprecision::numerator(v)));
    if (strictly_contractive(c, t)) return t;
  }
  for (int q = 1; q <= kMaxRoundingScale; ++q) {
    std::vector<long long> t;
    for (const auto& v : point) t.push_back(to_ll(ceil_of(v * q)));
    if (strictly_contractive(c, t)) return t;
  }
  const auto coef = exact_coefficients(c);
  const Rational pad = lp::exact(1e-9);
  cpp_int scale = 1;
  for (const auto& row : coef) {
    Rational slack = 0;
    Rational positive = pad;
    for (std::size_t k = 0; k < point.size(); ++k) {
      slack -= row[k] * point[k];
      if (row[k] > 0) positive += row[k];
    }
    if (slack <= 0) return std::nullopt;
    scale = std::max(scale, ceil_of(positive / slack) + 1);
  }
  std::vector<long long> t;
  for (const auto& v : point) {
    const cpp_int rounded = ceil_of(v * Rational(scale));
    if (rounded > std::numeric_limits<long long>::max()) return std::nullopt;
    t.push_back(static_cast<long long>(rounded));
  }
  if (strictly_contractive(c, t)) return t;
  return std::nullopt;
}

TFactorResult solve_lp_unbounded(const Coefficients& c, double margin) {
  TFactorResult out;
  const std::size_t n = c.coef.front().size();
  const auto coef = exact_coefficients(c);
  const lp::Solution sol = solve_relaxation(
      coef, lp::exact(margin), std::vector<long long>(n, 1), {});
  out.nodes = 1;
  if (sol.status != lp::Status::kOptimal) {
    out.reason = "linear feasibility problem has no solution with T >= 1";
    return out;
  }
  auto t = integerize(c, sol.x);
  if (!t) {
    out.reason = "could not scale the LP point to integers";
    return out;
  }
  out.feasible = true;
  out.t_factors = std::move(*t);
  return out;
}

// Depth-first branch and bound over the integer box [1, t_max]^n. Prunes on
// LP infeasibility only, so the search is exact: it finds an integer point iff
// one exists.
TFactorResult solve_lp_box(const Coefficients& c, long long t_max) {
  TFactorResult out;
  const std::size_t n = c.coef.front().size();
  const auto coef = exact_coefficients(c);
  const Rational margin = lp::exact(kContractionMargin);

  struct Node {
    std::vector<long long> lo, hi;
  };
  std::vector<Node> stack;
  stack.push_back({std::vector<long long>(n, 1), std::vector<long long>(n, t_max)});
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    const lp::Solution sol = solve_relaxation(coef, margin, node.lo, node.hi);
    ++out.nodes;
    if (sol.status != lp::Status::kOptimal) continue;
    std::size_t frac = n;
    for (std::size_t k = 0; k < n && frac == n; ++k) {
      if (!is_integral(sol.x[k])) frac = k;
    }
    if (frac == n) {
      std::vector<long long> t;
      for (const auto& v : sol.x) t.push_back(to_ll(boost::multiprecision::numerator(v)));
      if (strictly_contractive(c, t)) {
        out.feasible = true;
        out.t_factors = std::move(t);
        return out;
      }
      continue;
    }
    const cpp_int up = ceil_of(sol.x[frac]);
    Node upper = node;
    upper.lo[frac] = to_ll(up);
    Node lower = std::move(node);
    lower.hi[frac] = to_ll(up) - 1;
    stack.push_back(std::move(upper));
    stack.push_back(std::move(lower));  // explored first
  }
  out.reason = "no integer T-factors in [1, " + std::to_string(t_max) + "]";
  return out;
}

// Index -> T vector, first vertex most significant, digits 1..t_max.
void decode(long long index, long long t_max, std::vector<long long>& t) {
  for (std::size_t k = t.size(); k-- > 0;) {
    t[k] = index % t_max + 1;
    index /= t_max;
  }
}

bool hit(const Coefficients& c, long long index, long long t_max,
         std::vector<long long>& scratch) {
  decode(index, t_max, scratch);
  return strictly_contractive(c, scratch);
}

long long enumerate_serial(const Coefficients& c, long long total,
                           long long t_max) {
  std::vector<long long> t(c.coef.front().size());
  for (long long i = 0; i < total; ++i) {
    if (hit(c, i, t_max, t)) return i;
  }
  return -1;
}

long long enumerate_parallel(const Coefficients& c, long long total,
                             long long t_max) {
  const std::size_t n = c.coef.front().size();
  for (long long start = 0; start < total; start += kEnumBlock) {
    const long long stop = std::min(total, start + kEnumBlock);
    long long first = std::numeric_limits<long long>::max();
#pragma omp parallel
    {
      std::vector<long long> t(n);
#pragma omp for schedule(static) reduction(min : first)
      for (long long i = start; i < stop; ++i) {
        if (i < first && hit(c, i, t_max, t)) first = i;
      }
    }
    if (first != std::numeric_limits<long long>::max()) return first;
  }
  return -1;
}

TFactorResult solve_enum(const Coefficients& c, long long t_max,
                         Execution exec) {
  TFactorResult out;
  const std::size_t n = c.coef.front().size();
  if (std::pow(static_cast<double>(t_max), static_cast<double>(n)) >
      kMaxEnumeration) {
    throw ValidationError("enumeration of T_max^n exceeds 1e9 vectors");
  }
  long long total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= t_max;
  const long long index = exec == Execution::kSerial
                              ? enumerate_serial(c, total, t_max)
                              : enumerate_parallel(c, total, t_max);
  out.nodes = index < 0 ? total : index + 1;
  if (index < 0) {
    out.reason = "no integer T-factors in [1, " + std::to_string(t_max) + "]";
    return out;
  }
  out.feasible = true;
  out.t_factors.assign(n, 0);
  decode(index, t_max, out.t_factors);
  return out;
}

}  // namespace

TFactorResult solve_t_factors(std::span<const Vertex> vertices,
                              std::span<const int> plants,
                              std::span<const CertificateScalars> certs,
                              int max_burst, const TFactorOptions& options) {
  if (vertices.size() < 2) {
    throw ValidationError("a cycle needs at least two vertices");
  }
  if (options.t_max && *options.t_max < 1) {
    throw ValidationError("t_max must be >= 1");
  }
  const Coefficients c =
      build_coefficients(vertices, plants, certs, max_burst);
  if (c.coef.empty()) {
    throw ValidationError("no plants to constrain");
  }
  if (options.method == TFactorMethod::kEnum) {
    return solve_enum(c, options.t_max.value_or(kDefaultTMax), options.exec);
  }
  if (options.t_max) return solve_lp_box(c, *options.t_max);
  return solve_lp_unbounded(c, options.margin);
}

}  // namespace ncsched
