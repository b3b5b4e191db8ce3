#include "nucred/nucleolus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nucred/linprog.hpp"

namespace nucred {
namespace {

// Rank of the row space spanned by the coalition indicator vectors plus the
// all-ones efficiency row. Gaussian elimination with partial pivoting.
int indicator_rank(const std::vector<Coalition>& fixed, int n) {
  std::vector<std::vector<double>> rows;
  rows.emplace_back(static_cast<std::size_t>(n), 1.0);
  for (const Coalition& c : fixed) {
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      if (c.contains(i)) row[static_cast<std::size_t>(i)] = 1.0;
    rows.push_back(std::move(row));
  }
  int rank = 0;
  for (int col = 0; col < n && rank < static_cast<int>(rows.size()); ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r) {
      const double v = std::abs(rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (piv < 0) continue;
    std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(piv)]);
    const auto& prow = rows[static_cast<std::size_t>(rank)];
    const double pval = prow[static_cast<std::size_t>(col)];
    for (int r = rank + 1; r < static_cast<int>(rows.size()); ++r) {
      auto& row = rows[static_cast<std::size_t>(r)];
      const double f = row[static_cast<std::size_t>(col)] / pval;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        row[static_cast<std::size_t>(c)] -= f * prow[static_cast<std::size_t>(c)];
    }
    ++rank;
  }
  return rank;
}

struct LevelLp {
  std::vector<LpConstraint> constraints;
  std::vector<std::uint32_t> row_coalition;  // mask per inequality row, 0 otherwise
};

// Level LP over variables (x_0..x_{n-1}, eps):
//   x(C) + eps >= v(C)          for every unfixed non-trivial C
//   x(C)       = v(C) - eps_j   for every C fixed at an earlier level
//   x(N)       = v(N)
//   x_i       >= v({i})         in imputation mode
LevelLp build_level_lp(const CharacteristicGame& game,
                       const std::vector<std::uint32_t>& unfixed,
                       const std::vector<std::pair<Coalition, double>>& fixed,
                       AllocationDomain domain) {
  const int n = game.n;
  LevelLp lp;
  auto indicator = [&](std::uint32_t mask, double eps_coeff) {
    std::vector<double> row(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1u) row[static_cast<std::size_t>(i)] = 1.0;
    row[static_cast<std::size_t>(n)] = eps_coeff;
    return row;
  };
  for (std::uint32_t mask : unfixed) {
    lp.constraints.push_back(
        {indicator(mask, 1.0), ConstraintSense::greater_equal, game.values[mask]});
    lp.row_coalition.push_back(mask);
  }
  for (const auto& [c, eps] : fixed) {
    lp.constraints.push_back(
        {indicator(c.members, 0.0), ConstraintSense::equal, game.value(c) - eps});
    lp.row_coalition.push_back(0);
  }
  lp.constraints.push_back(
      {indicator(game.grand().members, 0.0), ConstraintSense::equal, game.grand_value()});
  lp.row_coalition.push_back(0);
  if (domain == AllocationDomain::imputation) {
    for (int i = 0; i < n; ++i) {
      lp.constraints.push_back({indicator(1u << i, 0.0), ConstraintSense::greater_equal,
                                game.values[1u << i]});
      lp.row_coalition.push_back(0);
    }
  }
  return lp;
}

}  // namespace

NucleolusSolution nucleolus(const CharacteristicGame& game, AllocationDomain domain) {
  game.validate();
  const int n = game.n;

  NucleolusSolution sol;
  std::vector<std::pair<Coalition, double>> fixed;
  std::vector<bool> is_fixed(game.num_coalitions(), false);
  std::vector<Coalition> fixed_masks;

  // Objective: minimize eps (last variable).
  std::vector<double> objective(static_cast<std::size_t>(n + 1), 0.0);
  objective[static_cast<std::size_t>(n)] = 1.0;

  double prev_eps = std::numeric_limits<double>::infinity();
  PayoffVector x(static_cast<std::size_t>(n), 0.0);
  bool have_x = false;

  for (int level = 1; indicator_rank(fixed_masks, n) < n; ++level) {
    std::vector<std::uint32_t> unfixed;
    for (std::uint32_t mask = 1; mask + 1 < game.num_coalitions(); ++mask)
      if (!is_fixed[mask]) unfixed.push_back(mask);
    if (unfixed.empty()) break;

    const LevelLp lp = build_level_lp(game, unfixed, fixed, domain);
    const LpSolution res = solve_linear_program(objective, lp.constraints);
    sol.lp_iterations += res.iterations;
    if (!res.ok())
      throw NucleolusError("level LP did not reach an optimum", level);

    const double eps = res.objective;
    if (eps >= prev_eps + kTightnessTol)
      throw NucleolusError("level excess failed to decrease", level);
    prev_eps = std::min(prev_eps, eps);
    x.assign(res.x.begin(), res.x.begin() + n);
    have_x = true;

    // Coalitions whose constraint binds at this optimum.
    struct Candidate {
      std::uint32_t mask;
      std::size_t row;
      double dual;
    };
    std::vector<Candidate> tight;
    for (std::size_t r = 0; r < lp.constraints.size(); ++r) {
      const std::uint32_t mask = lp.row_coalition[r];
      if (mask == 0) continue;
      double lhs = 0.0;
      for (int i = 0; i < n; ++i)
        if ((mask >> i) & 1u) lhs += x[static_cast<std::size_t>(i)];
      if (std::abs(lhs + eps - game.values[mask]) <= kTightnessTol)
        tight.push_back({mask, r, res.duals[r]});
    }

    std::vector<Coalition> newly_fixed;
    std::vector<Candidate> uncertain;
    for (const Candidate& c : tight) {
      if (c.dual > kTightnessTol)
        newly_fixed.push_back(Coalition(c.mask));
      else
        uncertain.push_back(c);
    }

    // Re-solve check for tight rows with vanishing duals: maximize the row's
    // slack over the optimal face. Slack zero means tight at every optimum.
    double best_fallback_slack = std::numeric_limits<double>::infinity();
    std::uint32_t best_fallback_mask = 0;
    if (!uncertain.empty()) {
      std::vector<LpConstraint> face = lp.constraints;
      std::vector<double> eps_row(static_cast<std::size_t>(n + 1), 0.0);
      eps_row[static_cast<std::size_t>(n)] = 1.0;
      face.push_back({eps_row, ConstraintSense::equal, eps});
      for (const Candidate& c : uncertain) {
        // max slack = max x(C) + eps - v(C)  <=>  min -(x(C) + eps)
        std::vector<double> obj(static_cast<std::size_t>(n + 1), 0.0);
        for (int i = 0; i < n; ++i)
          if ((c.mask >> i) & 1u) obj[static_cast<std::size_t>(i)] = -1.0;
        obj[static_cast<std::size_t>(n)] = -1.0;
        const LpSolution probe = solve_linear_program(obj, face);
        sol.lp_iterations += probe.iterations;
        if (!probe.ok())
          throw NucleolusError("tightness probe LP failed", level);
        const double max_slack = -probe.objective - game.values[c.mask];
        if (max_slack <= kTightnessTol)
          newly_fixed.push_back(Coalition(c.mask));
        else if (max_slack < best_fallback_slack) {
          best_fallback_slack = max_slack;
          best_fallback_mask = c.mask;
        }
      }
    }

    if (newly_fixed.empty()) {
      // Numerical corner: theory guarantees a coalition tight on the whole
      // optimal face; take the closest candidate instead of looping forever.
      if (best_fallback_mask == 0)
        throw NucleolusError("no tight coalition found at optimum", level);
      newly_fixed.push_back(Coalition(best_fallback_mask));
    }

    for (const Coalition& c : newly_fixed) {
      is_fixed[c.members] = true;
      fixed.emplace_back(c, eps);
      fixed_masks.push_back(c);
    }
    sol.levels.push_back({eps, std::move(newly_fixed)});
  }

  if (!have_x) {
    // No non-trivial coalitions (n == 1): efficiency pins the allocation.
    x.assign(static_cast<std::size_t>(n), game.grand_value() / n);
  }

  // Tidy efficiency to machine precision.
  const double drift = std::accumulate(x.begin(), x.end(), 0.0) - game.grand_value();
  for (double& xi : x) xi -= drift / n;
  sol.allocation = std::move(x);
  return sol;
}

PayoffVector nucleolus_oracle(const CharacteristicGame& game, double resolution) {
  game.validate();
  if (resolution <= 0.0) throw std::invalid_argument("oracle resolution must be positive");
  const int n = game.n;
  if (n > 4) throw std::invalid_argument("oracle supports at most 4 players");

  // Bounding box from the equal-split reference point x0: the nucleolus keeps
  // every excess at or below M = max_C e(C, x0), which pins each coordinate to
  // v({i}) - M <= x*_i <= v(N) - v(N \ {i}) + M.
  PayoffVector x0(static_cast<std::size_t>(n), game.grand_value() / n);
  const double m_ref = excess_sequence(game, x0).values.front();
  std::vector<double> lo(static_cast<std::size_t>(n)), hi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint32_t rest = game.grand().members & ~(1u << i);
    lo[static_cast<std::size_t>(i)] = game.values[1u << i] - m_ref - resolution;
    hi[static_cast<std::size_t>(i)] =
        game.grand_value() - game.values[rest] + m_ref + resolution;
  }

  PayoffVector best;
  ExcessSequence best_seq;
  PayoffVector point(static_cast<std::size_t>(n), 0.0);
  auto consider = [&] {
    ExcessSequence seq = excess_sequence(game, point);
    if (best.empty()) {
      best = point;
      best_seq = std::move(seq);
      return;
    }
    const LexOrder ord = lex_compare(seq, best_seq);
    if (ord == LexOrder::less ||
        (ord == LexOrder::equal &&
         std::lexicographical_compare(point.begin(), point.end(), best.begin(), best.end()))) {
      best = point;
      best_seq = std::move(seq);
    }
  };

  if (n == 1) {
    return {game.grand_value()};
  }
  auto sweep = [&](auto&& self, int coord, double remaining) -> void {
    if (coord == n - 1) {
      if (remaining < lo[static_cast<std::size_t>(coord)] - 1e-12 ||
          remaining > hi[static_cast<std::size_t>(coord)] + 1e-12)
        return;
      point[static_cast<std::size_t>(coord)] = remaining;
      consider();
      return;
    }
    const double l = lo[static_cast<std::size_t>(coord)];
    const long steps =
        std::lround(std::floor((hi[static_cast<std::size_t>(coord)] - l) / resolution)) + 1;
    for (long k = 0; k < steps; ++k) {
      const double v = l + static_cast<double>(k) * resolution;
      point[static_cast<std::size_t>(coord)] = v;
      self(self, coord + 1, remaining - v);
    }
  };
  sweep(sweep, 0, game.grand_value());
  if (best.empty()) throw std::runtime_error("oracle grid produced no feasible point");
  return best;
}

PayoffVector shapley(const CharacteristicGame& game) {
  game.validate();
  const int n = game.n;
  if (n > 12) throw std::invalid_argument("shapley supports at most 12 players");

  std::vector<double> factorial(static_cast<std::size_t>(n + 1), 1.0);
  for (int k = 1; k <= n; ++k)
    factorial[static_cast<std::size_t>(k)] = factorial[static_cast<std::size_t>(k - 1)] * k;
  // weight(|S|) = |S|! (n - |S| - 1)! / n!
  std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s)
    weight[static_cast<std::size_t>(s)] = factorial[static_cast<std::size_t>(s)] *
                                          factorial[static_cast<std::size_t>(n - s - 1)] /
                                          factorial[static_cast<std::size_t>(n)];

  PayoffVector phi(static_cast<std::size_t>(n), 0.0);
  const std::uint32_t full = game.grand().members;
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << i;
    const std::uint32_t others = full & ~bit;
    // Enumerate subsets of N \ {i}.
    std::uint32_t s = 0;
    while (true) {
      phi[static_cast<std::size_t>(i)] +=
          weight[static_cast<std::size_t>(std::popcount(s))] *
          (game.values[s | bit] - game.values[s]);
      if (s == others) break;
      s = (s - others) & others;  // next subset of `others`
    }
  }
  return phi;
}

}  // namespace nucred
