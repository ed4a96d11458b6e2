#include "ddalpha/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddalpha/errors.hpp"

namespace ddalpha::lp {

namespace {

void validate_problem(const LpProblem& p) {
  const std::size_t n = p.var_count();
  if (n == 0) throw std::invalid_argument("simplex_solve: no variables");
  if (p.eq_matrix.cols != n) throw std::invalid_argument("simplex_solve: eq_matrix.cols != var_count");
  if (p.eq_matrix.rows != p.eq_rhs.size())
    throw std::invalid_argument("simplex_solve: eq_matrix.rows != len(eq_rhs)");
  if (!p.eq_matrix.finite()) throw std::invalid_argument("simplex_solve: non-finite matrix entry");
  for (double v : p.objective)
    if (!std::isfinite(v)) throw std::invalid_argument("simplex_solve: non-finite objective entry");
  for (double v : p.eq_rhs)
    if (!std::isfinite(v)) throw std::invalid_argument("simplex_solve: non-finite rhs entry");
}

// Dense two-phase tableau. Columns: n original variables, m artificials, rhs.
class Tableau {
 public:
  explicit Tableau(const LpProblem& p)
      : m_(p.eq_matrix.rows), n_(p.var_count()), width_(n_ + m_ + 1) {
    rows_.assign(m_ * width_, 0.0);
    basis_.resize(m_);
    active_.assign(m_, true);
    cost1_.assign(width_, 0.0);
    cost2_.assign(width_, 0.0);

    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = p.eq_rhs[i] < 0.0 ? -1.0 : 1.0;
      double* row = rows_.data() + i * width_;
      for (std::size_t j = 0; j < n_; ++j) row[j] = sign * p.eq_matrix(i, j);
      row[n_ + i] = 1.0;
      row[width_ - 1] = sign * p.eq_rhs[i];
      basis_[i] = int(n_ + i);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      cost2_[j] = p.objective[j];
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) s += rows_[i * width_ + j];
      cost1_[j] = -s;
    }
    double b = 0.0;
    for (std::size_t i = 0; i < m_; ++i) b += rows_[i * width_ + width_ - 1];
    cost1_[width_ - 1] = -b;
  }

  // Runs one simplex phase to optimality on the given cost row.
  // Returns false when an unbounded ray is detected (phase 2 only).
  bool run_phase(std::vector<double>& cost, bool phase1) {
    std::size_t degenerate_run = 0;
    bool bland = false;
    const std::size_t iter_cap = 2000 + 400 * (n_ + m_);
    for (std::size_t iter = 0;; ++iter) {
      if (iter > iter_cap) throw NumericalBreakdown("simplex_solve: iteration limit reached");

      // candidate entering columns, preference-ordered
      candidates_.clear();
      for (std::size_t j = 0; j < n_; ++j)
        if (cost[j] < -tol::kOptimality) candidates_.push_back(int(j));
      if (candidates_.empty()) return true;
      if (!bland)
        std::stable_sort(candidates_.begin(), candidates_.end(),
                         [&](int a, int b) { return cost[a] < cost[b]; });

      int leave = -1;
      int enter = -1;
      bool ray_seen = false;
      for (int e : candidates_) {
        const auto [r, tiny_only] = ratio_test(e);
        if (r >= 0) {
          enter = e;
          leave = r;
          break;
        }
        if (!tiny_only) ray_seen = true;
      }
      if (enter < 0) {
        if (ray_seen && !phase1) return false;
        throw NumericalBreakdown("simplex_solve: no pivot above tolerance");
      }

      const bool degenerate = rows_[std::size_t(leave) * width_ + width_ - 1] <= tol::kOptimality;
      pivot(std::size_t(leave), std::size_t(enter));
      if (degenerate) {
        if (++degenerate_run > 2 * (n_ + m_)) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  double phase1_objective() const { return -cost1_[width_ - 1]; }

  // Pivot basic artificials out after phase 1; rows without a usable pivot
  // are redundant and dropped from further ratio tests.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i] || basis_[i] < int(n_)) continue;
      const double* row = rows_.data() + i * width_;
      int col = -1;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(row[j]) > tol::kPivot) {
          col = int(j);
          break;
        }
      }
      if (col >= 0)
        pivot(i, std::size_t(col));
      else
        active_[i] = false;
    }
  }

  std::vector<double>& cost1() { return cost1_; }
  std::vector<double>& cost2() { return cost2_; }

  std::vector<double> extract_solution() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      if (basis_[i] >= 0 && basis_[i] < int(n_))
        x[std::size_t(basis_[i])] = std::max(rows_[i * width_ + width_ - 1], 0.0);
    }
    return x;
  }

 private:
  // Minimum-ratio row for entering column e; ties resolved toward the
  // smallest basis variable index. Second result reports whether positive
  // entries existed but all fell below the pivot tolerance.
  std::pair<int, bool> ratio_test(int e) const {
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    bool any_positive = false;
    bool any_usable = false;
    for (std::size_t i = 0; i < m_; ++i) {
      if (!active_[i]) continue;
      const double a = rows_[i * width_ + std::size_t(e)];
      if (a <= 0.0) continue;
      any_positive = true;
      if (a <= tol::kPivot) continue;
      any_usable = true;
      const double t = rows_[i * width_ + width_ - 1] / a;
      if (t < best - 1e-15) {
        best = t;
        leave = int(i);
      } else if (t <= best + 1e-15 && leave >= 0 && basis_[i] < basis_[std::size_t(leave)]) {
        leave = int(i);
      }
    }
    return {leave, any_positive && !any_usable};
  }

  void pivot(std::size_t r, std::size_t e) {
    double* prow = rows_.data() + r * width_;
    const double inv = 1.0 / prow[e];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[e] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = rows_.data() + i * width_;
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
    }
    for (auto* cost : {&cost1_, &cost2_}) {
      double* row = cost->data();
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
    }
    basis_[r] = int(e);
  }

  std::size_t m_, n_, width_;
  std::vector<double> rows_;
  std::vector<double> cost1_, cost2_;
  std::vector<int> basis_;
  std::vector<char> active_;
  std::vector<int> candidates_;
};

}  // namespace

LpResult simplex_solve(const LpProblem& problem) {
  validate_problem(problem);
  Tableau tab(problem);

  tab.run_phase(tab.cost1(), true);
  if (tab.phase1_objective() > tol::kFeasibility) return {LpStatus::Infeasible, 0.0, {}};
  tab.drive_out_artificials();

  if (!tab.run_phase(tab.cost2(), false)) return {LpStatus::Unbounded, 0.0, {}};

  LpResult result;
  result.status = LpStatus::Optimal;
  result.solution = tab.extract_solution();
  double obj = 0.0;
  for (std::size_t j = 0; j < problem.var_count(); ++j)
    obj += problem.objective[j] * result.solution[j];
  result.objective_value = obj;
  return result;
}

Matrix cholesky_lower(const Matrix& s) {
  if (s.rows != s.cols) throw std::invalid_argument("cholesky_lower: matrix not square");
  const std::size_t d = s.rows;
  double scale = 0.0;
  for (double v : s.data) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-8 * (1.0 + scale))
        throw std::invalid_argument("cholesky_lower: matrix not symmetric");

  Matrix L(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double diag = s(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= L(j, k) * L(j, k);
    if (diag <= tol::kPivot) throw NotPositiveDefinite("cholesky_lower: pivot <= 1e-12");
    L(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / L(j, j);
    }
  }
  return L;
}

Matrix spd_inverse(const Matrix& m) {
  const Matrix L = cholesky_lower(m);
  const std::size_t d = m.rows;

  Matrix Li(d, d);  // inverse of the lower factor
  for (std::size_t j = 0; j < d; ++j) {
    Li(j, j) = 1.0 / L(j, j);
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = 0.0;
      for (std::size_t k = j; k < i; ++k) v += L(i, k) * Li(k, j);
      Li(i, j) = -v / L(i, i);
    }
  }

  Matrix inv(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double v = 0.0;
      for (std::size_t k = j; k < d; ++k) v += Li(k, i) * Li(k, j);
      inv(i, j) = v;
      inv(j, i) = v;
    }
  }
  return inv;
}

namespace {

void validate_points(const Matrix& points, std::span<const double> target, const char* who) {
  if (points.rows == 0) throw std::invalid_argument(std::string(who) + ": empty point set");
  if (target.size() != points.cols)
    throw std::invalid_argument(std::string(who) + ": target dimension mismatch");
  if (!points.finite()) throw std::invalid_argument(std::string(who) + ": non-finite point entry");
  for (double v : target)
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite target entry");
}

}  // namespace

// Bounded-variable revised simplex on
//   max 1'p  s.t.  C p = 0,  0 <= p <= 1/n,   C_j = x_j - target.
// The all-zero point is a valid (degenerate) start, with d artificial
// variables fixed at zero providing the initial identity basis. Whenever the
// target lies in the hull the optimum alpha* = sum p is at least 1/n, so
// infeasibility (the hull test) is decided by alpha* falling below 1/(2n).
MinMaxResult solve_min_max_weight(const Matrix& points, std::span<const double> target) {
  validate_points(points, target, "solve_min_max_weight");
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;
  const double ub = 1.0 / double(n);

  // constraint columns, column-major
  std::vector<double> cols(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) cols[i * d + k] = points(i, k) - target[k];

  enum : char { kLower = 0, kUpper = 1, kBasic = 2 };
  std::vector<char> state(n + d, kLower);
  std::vector<int> basis(d);
  std::vector<double> binv(d * d, 0.0);
  std::vector<double> xb(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    basis[k] = int(n + k);
    binv[k * d + k] = 1.0;
    state[n + k] = kBasic;
  }

  auto col_entry = [&](int j, std::size_t k) -> double {
    return j < int(n) ? cols[std::size_t(j) * d + k] : (std::size_t(j) - n == k ? 1.0 : 0.0);
  };

  std::vector<double> y(d), w(d);

  // Rebuilds binv and the basic values from scratch (numerical hygiene).
  auto refactor = [&]() {
    std::vector<double> aug(d * 2 * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) aug[k * 2 * d + i] = col_entry(basis[i], k);
      aug[i * 2 * d + d + i] = 1.0;
    }
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < d; ++r)
        if (std::abs(aug[r * 2 * d + c]) > std::abs(aug[p * 2 * d + c])) p = r;
      if (std::abs(aug[p * 2 * d + c]) <= tol::kPivot)
        throw NumericalBreakdown("solve_min_max_weight: singular basis");
      if (p != c)
        for (std::size_t j = 0; j < 2 * d; ++j) std::swap(aug[p * 2 * d + j], aug[c * 2 * d + j]);
      const double inv = 1.0 / aug[c * 2 * d + c];
      for (std::size_t j = 0; j < 2 * d; ++j) aug[c * 2 * d + j] *= inv;
      for (std::size_t r = 0; r < d; ++r) {
        if (r == c) continue;
        const double f = aug[r * 2 * d + c];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < 2 * d; ++j) aug[r * 2 * d + j] -= f * aug[c * 2 * d + j];
      }
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) binv[i * d + k] = aug[i * 2 * d + d + k];
    // xb = -binv * (sum of upper-bound columns * ub)
    std::vector<double> rhs(d, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] != kUpper) continue;
      for (std::size_t k = 0; k < d; ++k) rhs[k] += cols[j * d + k] * ub;
    }
    for (std::size_t i = 0; i < d; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < d; ++k) v -= binv[i * d + k] * rhs[k];
      xb[i] = v;
    }
  };

  const std::size_t iter_cap = 10000 + 200 * (n + d);
  std::size_t degenerate_run = 0;
  std::size_t pivots_since_refactor = 0;
  bool bland = false;

  for (std::size_t iter = 0;; ++iter) {
    if (iter > iter_cap) throw NumericalBreakdown("solve_min_max_weight: iteration limit reached");

    for (std::size_t k = 0; k < d; ++k) {
      double v = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        if (basis[i] < int(n)) v += binv[i * d + k];
      y[k] = v;
    }

    int enter = -1;
    double best_score = tol::kOptimality;
    char enter_state = kLower;
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == kBasic) continue;
      double r = 1.0;
      const double* cj = cols.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) r -= y[k] * cj[k];
      const bool improving = state[j] == kLower ? r > tol::kOptimality : r < -tol::kOptimality;
      if (!improving) continue;
      if (bland) {
        enter = int(j);
        enter_state = state[j];
        break;
      }
      const double score = std::abs(r);
      if (score > best_score) {
        best_score = score;
        enter = int(j);
        enter_state = state[j];
      }
    }
    if (enter < 0) break;  // optimal

    const double* ce = cols.data() + std::size_t(enter) * d;
    for (std::size_t i = 0; i < d; ++i) {
      double v = 0.0;
      for (std::size_t k = 0; k < d; ++k) v += binv[i * d + k] * ce[k];
      w[i] = v;
    }
    const double sigma = enter_state == kLower ? 1.0 : -1.0;

    // ratio test: basic i moves at rate -sigma*w_i; artificials are fixed at 0
    double theta = ub;
    int leave = -1;
    for (std::size_t i = 0; i < d; ++i) {
      const double rho = sigma * w[i];
      const bool artificial = basis[i] >= int(n);
      double t;
      if (rho > tol::kPivot)
        t = xb[i] / rho;  // heading to its lower bound 0
      else if (rho < -tol::kPivot)
        t = (xb[i] - (artificial ? 0.0 : ub)) / rho;  // heading to its upper bound
      else
        continue;
      if (t < 0.0) t = 0.0;
      if (t < theta - 1e-15) {
        theta = t;
        leave = int(i);
      } else if (t <= theta + 1e-15 && leave >= 0 && basis[i] < basis[std::size_t(leave)]) {
        leave = int(i);
      }
    }

    if (leave < 0) {
      // full bound-to-bound flip, never degenerate
      for (std::size_t i = 0; i < d; ++i) xb[i] -= ub * sigma * w[i];
      state[std::size_t(enter)] = enter_state == kLower ? kUpper : kLower;
      degenerate_run = 0;
      bland = false;
      continue;
    }

    for (std::size_t i = 0; i < d; ++i) xb[i] -= theta * sigma * w[i];
    const int leaving_var = basis[std::size_t(leave)];
    if (leaving_var < int(n)) {
      const double rho = sigma * w[std::size_t(leave)];
      state[std::size_t(leaving_var)] = rho > 0.0 ? kLower : kUpper;
    } else {
      state[std::size_t(leaving_var)] = kLower;  // fixed artificial
    }
    basis[std::size_t(leave)] = enter;
    state[std::size_t(enter)] = kBasic;
    xb[std::size_t(leave)] = enter_state == kLower ? theta : ub - theta;

    const double piv = w[std::size_t(leave)];
    double* brow = binv.data() + std::size_t(leave) * d;
    const double inv = 1.0 / piv;
    for (std::size_t k = 0; k < d; ++k) brow[k] *= inv;
    for (std::size_t i = 0; i < d; ++i) {
      if (i == std::size_t(leave)) continue;
      const double f = w[i];
      if (f == 0.0) continue;
      double* row = binv.data() + i * d;
      for (std::size_t k = 0; k < d; ++k) row[k] -= f * brow[k];
    }

    if (theta <= 1e-13) {
      if (++degenerate_run > 2 * (n + d)) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
    if (++pivots_since_refactor >= 64) {
      refactor();
      pivots_since_refactor = 0;
    }
  }

  // assemble p and the objective
  std::vector<double> p(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    if (state[j] == kUpper) p[j] = ub;
  for (std::size_t i = 0; i < d; ++i)
    if (basis[i] < int(n)) p[std::size_t(basis[i])] = std::clamp(xb[i], 0.0, ub);
  double alpha = 0.0;
  for (double v : p) alpha += v;

  MinMaxResult result;
  if (alpha < 0.5 * ub) {
    result.status = MinMaxStatus::Infeasible;
    return result;
  }
  result.status = MinMaxStatus::Optimal;
  result.t_star = ub / alpha;
  result.weights.resize(n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += p[j];
  for (std::size_t j = 0; j < n; ++j) result.weights[j] = p[j] / sum;
  return result;
}

MinMaxResult solve_min_max_weight_reference(const Matrix& points, std::span<const double> target) {
  validate_points(points, target, "solve_min_max_weight_reference");
  const std::size_t n = points.rows;
  const std::size_t d = points.cols;

  // variables: lambda_1..lambda_n, t, s_1..s_n
  const std::size_t nv = 2 * n + 1;
  LpProblem prob;
  prob.objective.assign(nv, 0.0);
  prob.objective[n] = 1.0;
  prob.eq_matrix = Matrix(d + 1 + n, nv);
  prob.eq_rhs.assign(d + 1 + n, 0.0);

  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) prob.eq_matrix(k, i) = points(i, k);
    prob.eq_rhs[k] = target[k];
  }
  for (std::size_t i = 0; i < n; ++i) prob.eq_matrix(d, i) = 1.0;
  prob.eq_rhs[d] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    prob.eq_matrix(d + 1 + i, i) = 1.0;
    prob.eq_matrix(d + 1 + i, n) = -1.0;
    prob.eq_matrix(d + 1 + i, n + 1 + i) = 1.0;
  }

  const LpResult r = simplex_solve(prob);
  MinMaxResult result;
  if (r.status == LpStatus::Infeasible) {
    result.status = MinMaxStatus::Infeasible;
    return result;
  }
  if (r.status != LpStatus::Optimal)
    throw NumericalBreakdown("solve_min_max_weight_reference: unexpected unbounded status");
  result.status = MinMaxStatus::Optimal;
  result.t_star = r.objective_value;
  result.weights.assign(r.solution.begin(), r.solution.begin() + long(n));
  return result;
}

}  // namespace ddalpha::lp
