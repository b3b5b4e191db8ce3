#include "nucred/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nucred {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kReducedCostTol = 1e-9;
constexpr double kPhase1FeasTol = 1e-8;

// Dense tableau simplex. Columns: split variables, then one slack/surplus or
// artificial per row (exactly the initial identity), then rhs.
struct Tableau {
  int rows = 0;
  int cols = 0;  // excluding rhs
  std::vector<double> a;          // (rows) x (cols + 1), row-major
  std::vector<int> basis;         // basic column per row
  std::vector<double> cost;       // phase-2 costs per column
  std::vector<bool> barred;       // columns excluded from entering (artificials)

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * (cols + 1) + c]; }
  double& rhs(int r) { return at(r, cols); }
  double rhs(int r) const { return at(r, cols); }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    const double inv = 1.0 / piv;
    for (int c = 0; c <= cols; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (std::abs(f) < kPivotTol) {
        at(r, pc) = 0.0;
        continue;
      }
      for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    basis[static_cast<std::size_t>(pr)] = pc;
  }
};

// Reduced costs for the given cost vector under the current basis.
std::vector<double> reduced_costs(const Tableau& t, const std::vector<double>& cost) {
  std::vector<double> d(cost);
  for (int r = 0; r < t.rows; ++r) {
    const double cb = cost[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(r)])];
    if (cb == 0.0) continue;
    for (int c = 0; c < t.cols; ++c) d[static_cast<std::size_t>(c)] -= cb * t.at(r, c);
  }
  return d;
}

// Runs simplex iterations to optimality for `cost`. Returns the terminal
// status; `iters` accumulates pivots. Bland's rule engages after a stall.
LpStatus run_simplex(Tableau& t, const std::vector<double>& cost, int max_iters, int& iters) {
  int stall = 0;
  double last_obj = std::numeric_limits<double>::infinity();
  while (true) {
    if (iters >= max_iters) return LpStatus::iteration_limit;
    const std::vector<double> d = reduced_costs(t, cost);
    const bool bland = stall > 2 * t.rows + 20;

    int enter = -1;
    double best = -kReducedCostTol;
    for (int c = 0; c < t.cols; ++c) {
      if (t.barred[static_cast<std::size_t>(c)]) continue;
      const double dc = d[static_cast<std::size_t>(c)];
      if (dc < -kReducedCostTol) {
        if (bland) {
          enter = c;
          break;
        }
        if (dc < best) {
          best = dc;
          enter = c;
        }
      }
    }
    if (enter < 0) return LpStatus::optimal;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.rows; ++r) {
      const double arc = t.at(r, enter);
      if (arc > kPivotTol) {
        const double ratio = t.rhs(r) / arc;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && leave >= 0 &&
             t.basis[static_cast<std::size_t>(r)] < t.basis[static_cast<std::size_t>(leave)])) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return LpStatus::unbounded;

    t.pivot(leave, enter);
    ++iters;

    double obj = 0.0;
    for (int r = 0; r < t.rows; ++r)
      obj += cost[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(r)])] * t.rhs(r);
    if (obj < last_obj - 1e-12) {
      stall = 0;
      last_obj = obj;
    } else {
      ++stall;
    }
  }
}

}  // namespace

LpSolution solve_linear_program(const std::vector<double>& objective,
                                const std::vector<LpConstraint>& constraints,
                                int max_iterations) {
  const int nvars = static_cast<int>(objective.size());
  const int m = static_cast<int>(constraints.size());
  for (const LpConstraint& c : constraints)
    if (static_cast<int>(c.coeffs.size()) != nvars)
      throw std::invalid_argument("constraint width does not match objective length");

  LpSolution sol;
  sol.x.assign(static_cast<std::size_t>(nvars), 0.0);
  sol.duals.assign(static_cast<std::size_t>(m), 0.0);
  if (m == 0) {
    // Unconstrained: optimal only for a zero objective.
    bool zero = true;
    for (double c : objective) zero = zero && c == 0.0;
    sol.status = zero ? LpStatus::optimal : LpStatus::unbounded;
    return sol;
  }

  // Column layout: [x+ (nvars)] [x- (nvars)] [one helper per row].
  // Helper is a slack (<=), a surplus plus artificial (>=), or an artificial (=),
  // chosen so the initial basis is the identity.
  const int split = 2 * nvars;
  std::vector<int> row_sign(static_cast<std::size_t>(m), 1);   // -1 when row was negated
  std::vector<int> helper_col(static_cast<std::size_t>(m), -1);
  std::vector<ConstraintSense> sense(static_cast<std::size_t>(m));

  // First pass: count extra columns. A >= row with nonnegative rhs needs both a
  // surplus and an artificial column.
  int extra = 0;
  std::vector<int> surplus_col(static_cast<std::size_t>(m), -1);
  for (int r = 0; r < m; ++r) {
    ConstraintSense s = constraints[static_cast<std::size_t>(r)].sense;
    double b = constraints[static_cast<std::size_t>(r)].rhs;
    if (b < 0) {
      row_sign[static_cast<std::size_t>(r)] = -1;
      b = -b;
      if (s == ConstraintSense::less_equal)
        s = ConstraintSense::greater_equal;
      else if (s == ConstraintSense::greater_equal)
        s = ConstraintSense::less_equal;
    }
    sense[static_cast<std::size_t>(r)] = s;
    extra += (s == ConstraintSense::greater_equal) ? 2 : 1;
  }

  Tableau t;
  t.rows = m;
  t.cols = split + extra;
  t.a.assign(static_cast<std::size_t>(m) * (t.cols + 1), 0.0);
  t.basis.assign(static_cast<std::size_t>(m), -1);
  t.barred.assign(static_cast<std::size_t>(t.cols), false);

  std::vector<bool> artificial(static_cast<std::size_t>(t.cols), false);
  int next = split;
  for (int r = 0; r < m; ++r) {
    const LpConstraint& con = constraints[static_cast<std::size_t>(r)];
    const double sgn = row_sign[static_cast<std::size_t>(r)];
    for (int v = 0; v < nvars; ++v) {
      const double a = sgn * con.coeffs[static_cast<std::size_t>(v)];
      t.at(r, v) = a;
      t.at(r, nvars + v) = -a;
    }
    t.rhs(r) = sgn * con.rhs;
    switch (sense[static_cast<std::size_t>(r)]) {
      case ConstraintSense::less_equal:
        t.at(r, next) = 1.0;
        helper_col[static_cast<std::size_t>(r)] = next;
        t.basis[static_cast<std::size_t>(r)] = next++;
        break;
      case ConstraintSense::greater_equal:
        t.at(r, next) = -1.0;
        surplus_col[static_cast<std::size_t>(r)] = next++;
        t.at(r, next) = 1.0;
        artificial[static_cast<std::size_t>(next)] = true;
        helper_col[static_cast<std::size_t>(r)] = next;
        t.basis[static_cast<std::size_t>(r)] = next++;
        break;
      case ConstraintSense::equal:
        t.at(r, next) = 1.0;
        artificial[static_cast<std::size_t>(next)] = true;
        helper_col[static_cast<std::size_t>(r)] = next;
        t.basis[static_cast<std::size_t>(r)] = next++;
        break;
    }
  }

  if (max_iterations <= 0) max_iterations = 200 * (t.rows + t.cols) + 2000;

  // Phase 1: drive artificials to zero.
  bool any_artificial = false;
  std::vector<double> phase1(static_cast<std::size_t>(t.cols), 0.0);
  for (int c = 0; c < t.cols; ++c)
    if (artificial[static_cast<std::size_t>(c)]) {
      phase1[static_cast<std::size_t>(c)] = 1.0;
      any_artificial = true;
    }

  int iters = 0;
  if (any_artificial) {
    const LpStatus st = run_simplex(t, phase1, max_iterations, iters);
    if (st == LpStatus::iteration_limit) {
      sol.status = st;
      sol.iterations = iters;
      return sol;
    }
    double infeas = 0.0;
    for (int r = 0; r < t.rows; ++r)
      if (artificial[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(r)])])
        infeas += t.rhs(r);
    if (infeas > kPhase1FeasTol) {
      sol.status = LpStatus::infeasible;
      sol.iterations = iters;
      return sol;
    }
    // Pivot any zero-level artificial out of the basis when possible.
    for (int r = 0; r < t.rows; ++r) {
      if (!artificial[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(r)])]) continue;
      for (int c = 0; c < t.cols; ++c) {
        if (artificial[static_cast<std::size_t>(c)]) continue;
        if (std::abs(t.at(r, c)) > 1e-7) {
          t.pivot(r, c);
          ++iters;
          break;
        }
      }
    }
    for (int c = 0; c < t.cols; ++c)
      if (artificial[static_cast<std::size_t>(c)]) t.barred[static_cast<std::size_t>(c)] = true;
  }

  // Phase 2.
  t.cost.assign(static_cast<std::size_t>(t.cols), 0.0);
  for (int v = 0; v < nvars; ++v) {
    t.cost[static_cast<std::size_t>(v)] = objective[static_cast<std::size_t>(v)];
    t.cost[static_cast<std::size_t>(nvars + v)] = -objective[static_cast<std::size_t>(v)];
  }
  const LpStatus st = run_simplex(t, t.cost, max_iterations, iters);
  sol.iterations = iters;
  if (st != LpStatus::optimal) {
    sol.status = st;
    return sol;
  }

  for (int r = 0; r < t.rows; ++r) {
    const int b = t.basis[static_cast<std::size_t>(r)];
    if (b < nvars)
      sol.x[static_cast<std::size_t>(b)] += t.rhs(r);
    else if (b < split)
      sol.x[static_cast<std::size_t>(b - nvars)] -= t.rhs(r);
  }
  sol.objective = 0.0;
  for (int v = 0; v < nvars; ++v)
    sol.objective += objective[static_cast<std::size_t>(v)] * sol.x[static_cast<std::size_t>(v)];

  // Duals from the reduced cost of each row's initial identity column:
  // d(helper of row r) = c_helper - y_r * (+-1). Undo the rhs-normalization flip.
  const std::vector<double> d = reduced_costs(t, t.cost);
  for (int r = 0; r < m; ++r) {
    const int hc = helper_col[static_cast<std::size_t>(r)];
    double y;
    if (sense[static_cast<std::size_t>(r)] == ConstraintSense::greater_equal) {
      // Prefer the surplus column (never barred); helper artificial also works.
      const int sc = surplus_col[static_cast<std::size_t>(r)];
      y = d[static_cast<std::size_t>(sc)];  // d = 0 - y*(-1) = y
      (void)hc;
    } else {
      y = -d[static_cast<std::size_t>(hc)];  // d = 0 - y*(+1) = -y
    }
    sol.duals[static_cast<std::size_t>(r)] = row_sign[static_cast<std::size_t>(r)] * y;
  }
  sol.status = LpStatus::optimal;
  return sol;
}

}  // namespace nucred
