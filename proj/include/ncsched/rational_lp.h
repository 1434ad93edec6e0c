#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ncsched::lp {

using Rational = boost::multiprecision::cpp_rational;

// Exact value of a finite double.
Rational exact(double value);

/// minimize c'x  subject to  A x <= b,  x >= 0.
/// Dense; intended for the tens-of-variables problems the T-factor search
/// produces.
struct Problem {
  int num_vars = 0;
  std::vector<std::vector<Rational>> A;
  std::vector<Rational> b;
  std::vector<Rational> c;  // empty means pure feasibility

  void add_row(std::vector<Rational> row, Rational rhs);
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Solution {
  Status status = Status::kInfeasible;
  std::vector<Rational> x;
  Rational objective;
  int pivots = 0;
};

/// Two-phase primal simplex with Bland's rule in exact arithmetic.
Solution solve(const Problem& problem);

}  // namespace ncsched::lp
