#pragma once

#include <vector>

namespace nucred {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, numerical_failure };

enum class ConstraintSense { less_equal, greater_equal, equal };

struct LpConstraint {
  std::vector<double> coeffs;
  ConstraintSense sense = ConstraintSense::less_equal;
  double rhs = 0.0;
};

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  std::vector<double> x;      // primal values, one per variable
  double objective = 0.0;     // c . x at the optimum
  std::vector<double> duals;  // one per constraint, see sign convention below
  int iterations = 0;

  bool ok() const { return status == LpStatus::optimal; }
};

/// Minimizes `objective . x` over free variables x subject to the given dense
/// constraints. Two-phase primal simplex on the full tableau; free variables
/// are handled by an internal positive/negative split.
///
/// Dual sign convention (minimization): at the optimum the duals y satisfy
/// objective = A^T y on the support of x, with y_i >= 0 for >= rows,
/// y_i <= 0 for <= rows, and free for equalities. Complementary slackness
/// holds, so |y_i| > 0 implies row i is tight at every optimum.
LpSolution solve_linear_program(const std::vector<double>& objective,
                                const std::vector<LpConstraint>& constraints,
                                int max_iterations = 0);

}  // namespace nucred
