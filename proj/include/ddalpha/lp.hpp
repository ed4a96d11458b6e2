#pragma once

#include <span>
#include <vector>

#include "ddalpha/matrix.hpp"

namespace ddalpha::lp {

// All numerical tolerances of the kernel live here.
namespace tol {
inline constexpr double kPivot = 1e-12;        // smallest usable pivot / factor pivot
inline constexpr double kFeasibility = 1e-7;   // phase-1 residual above which a problem is infeasible
inline constexpr double kOptimality = 1e-9;    // reduced-cost threshold
}  // namespace tol

enum class LpStatus { Optimal, Infeasible, Unbounded };

// min objective'x  s.t.  eq_matrix x = eq_rhs,  x >= 0
struct LpProblem {
  std::vector<double> objective;
  Matrix eq_matrix;
  std::vector<double> eq_rhs;

  std::size_t var_count() const { return objective.size(); }
};

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double objective_value = 0.0;
  std::vector<double> solution;
};

// Two-phase dense-tableau simplex. Dantzig pricing with Bland's rule engaged
// after 2*(total variables) consecutive degenerate pivots; deterministic for
// identical input. Throws NumericalBreakdown when no pivot above tol::kPivot
// can be found once Bland's rule is active.
LpResult simplex_solve(const LpProblem& problem);

// Lower Cholesky factor of a symmetric positive definite matrix. Throws
// NotPositiveDefinite when a factorization pivot falls below tol::kPivot.
Matrix cholesky_lower(const Matrix& m);

// Inverse of a symmetric positive definite matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& m);

enum class MinMaxStatus { Optimal, Infeasible };

struct MinMaxResult {
  MinMaxStatus status = MinMaxStatus::Infeasible;
  double t_star = 0.0;             // min over convex weights of max_i lambda_i
  std::vector<double> weights;     // attaining weights (sum to 1)
};

// min { max_i lambda_i : sum_i lambda_i points_i = target, sum lambda = 1,
// lambda >= 0 }, or Infeasible when the target lies outside the convex hull
// of the rows of `points`. Solved through a bounded-variable revised simplex
// on the equivalent mass formulation
//   max 1'p  s.t.  sum_i p_i (x_i - target) = 0,  0 <= p_i <= 1/n,
// whose optimum alpha* relates by t* = 1/(n alpha*).
MinMaxResult solve_min_max_weight(const Matrix& points, std::span<const double> target);

// Same contract, solved by augmenting with the variable t and the constraints
// lambda_i <= t in standard equality form (explicit slacks) through
// simplex_solve. Kept as the reference route; the tests cross-check both.
MinMaxResult solve_min_max_weight_reference(const Matrix& points, std::span<const double> target);

}  // namespace ddalpha::lp
