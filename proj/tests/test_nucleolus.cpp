#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "nucred/nucleolus.hpp"
#include "test_support.hpp"

using namespace nucred;
namespace nt = nucred::testing;

TEST_CASE("majority game splits evenly") {
  const NucleolusSolution sol = nucleolus(nt::majority_game());
  for (double x : sol.allocation) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("two player singleton equalization") {
  CharacteristicGame game(2);
  game.values[0b01] = 2.0;
  game.values[0b10] = 4.0;
  game.values[0b11] = 10.0;
  const NucleolusSolution sol = nucleolus(game);
  CHECK(sol.allocation[0] == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(sol.allocation[1] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("additive game gives ones") {
  const NucleolusSolution sol = nucleolus(nt::additive_game(4));
  for (double x : sol.allocation) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single player takes the grand value") {
  CharacteristicGame game(1);
  game.values[1] = 3.5;
  CHECK(nucleolus(game).allocation == PayoffVector{3.5});
}

TEST_CASE("levels decrease and solution is efficient") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 4);
    const NucleolusSolution sol = nucleolus(game);
    CHECK(is_efficient(game, sol.allocation, 1e-9));
    for (std::size_t k = 1; k < sol.levels.size(); ++k)
      CHECK(sol.levels[k].max_excess < sol.levels[k - 1].max_excess + 1e-9);
    // The worst non-trivial excess matches the first level's optimum (the
    // empty and grand coalitions contribute constant zeros to the sequence).
    double worst = -1e100;
    for (std::uint32_t mask = 1; mask + 1 < game.num_coalitions(); ++mask)
      worst = std::max(worst, excess(game, Coalition(mask), sol.allocation));
    CHECK(worst == doctest::Approx(sol.levels.front().max_excess).epsilon(1e-7));
  }
}

TEST_CASE("lexicographic minimality against random efficient points") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 15; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 4);
    const NucleolusSolution sol = nucleolus(game);
    const ExcessSequence best = excess_sequence(game, sol.allocation);
    for (int k = 0; k < 200; ++k) {
      const PayoffVector y = nt::random_efficient(rng, game, k % 2 ? 0.05 : 1.0);
      const LexOrder ord = lex_compare(best, excess_sequence(game, y));
      CHECK((ord == LexOrder::less || ord == LexOrder::equal));
    }
  }
}

TEST_CASE("dummy player receives its singleton value") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    // Random 3-player game extended with a dummy player 3 of fixed worth.
    const CharacteristicGame base = nt::random_game(rng, 3, 0.0, 1.0);
    const double dummy_worth = 0.25;
    CharacteristicGame game(4);
    for (std::uint32_t mask = 0; mask < 8; ++mask) {
      game.values[mask] = base.values[mask];
      game.values[mask | 0b1000u] = base.values[mask] + dummy_worth;
    }
    const NucleolusSolution sol = nucleolus(game);
    CHECK(sol.allocation[3] == doctest::Approx(dummy_worth).epsilon(1e-7));
  }
}

TEST_CASE("symmetry: permuting labels permutes the allocation") {
  std::mt19937_64 rng(37);
  const std::vector<int> perm{2, 0, 3, 1};
  for (int trial = 0; trial < 20; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 4);
    const CharacteristicGame permuted = nt::permute_game(game, perm);
    const PayoffVector x = nucleolus(game).allocation;
    const PayoffVector y = nucleolus(permuted).allocation;
    for (int i = 0; i < 4; ++i)
      CHECK(y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] ==
            doctest::Approx(x[static_cast<std::size_t>(i)]).epsilon(1e-7));
  }
}

TEST_CASE("core membership when a sampled core point exists") {
  std::mt19937_64 rng(41);
  int cores_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 3);
    bool sampled_core = false;
    for (int k = 0; k < 300 && !sampled_core; ++k)
      sampled_core = core_contains(game, nt::random_efficient(rng, game));
    if (!sampled_core) continue;
    ++cores_seen;
    CHECK(core_contains(game, nucleolus(game).allocation));
  }
  CHECK(cores_seen > 5);
}

TEST_CASE("oracle agreement on the fixed examples") {
  const PayoffVector oracle_majority = nucleolus_oracle(nt::majority_game(), 1.0 / 30);
  for (double x : oracle_majority) CHECK(x == doctest::Approx(1.0 / 3).epsilon(0.04));

  CharacteristicGame game(2);
  game.values[0b01] = 2.0;
  game.values[0b10] = 4.0;
  game.values[0b11] = 10.0;
  const PayoffVector pt = nucleolus_oracle(game, 0.1);
  CHECK(pt[0] == doctest::Approx(4.0).epsilon(0.11));
  CHECK(pt[1] == doctest::Approx(6.0).epsilon(0.11));

  CHECK_THROWS_AS(nucleolus_oracle(game, 0.0), std::invalid_argument);
}

TEST_CASE("oracle never lex-beats the LP solution") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 3);
    const PayoffVector exact = nucleolus(game).allocation;
    const PayoffVector grid = nucleolus_oracle(game, 1.0 / 40);
    const LexOrder ord = lex_compare(excess_sequence(game, grid), excess_sequence(game, exact));
    CHECK((ord == LexOrder::greater || ord == LexOrder::equal));
    for (int i = 0; i < game.n; ++i)
      CHECK(std::abs(grid[static_cast<std::size_t>(i)] - exact[static_cast<std::size_t>(i)]) <=
            1.0 / 40 + 1e-9);
  }
}

TEST_CASE("shapley axioms") {
  const PayoffVector additive = shapley(nt::additive_game(4));
  for (double x : additive) CHECK(x == doctest::Approx(1.0));

  const PayoffVector majority = shapley(nt::majority_game());
  for (double x : majority) CHECK(x == doctest::Approx(1.0 / 3));

  // Dummy axiom.
  CharacteristicGame game(3);
  game.values[0b001] = 1.0;
  game.values[0b010] = 0.5;
  game.values[0b011] = 2.0;
  game.values[0b100] = 0.75;  // dummy: adds exactly 0.75 everywhere
  game.values[0b101] = 1.75;
  game.values[0b110] = 1.25;
  game.values[0b111] = 2.75;
  CHECK(shapley(game)[2] == doctest::Approx(0.75));

  // Efficiency on random games.
  std::mt19937_64 rng(47);
  const CharacteristicGame random = nt::random_game(rng, 5);
  const PayoffVector phi = shapley(random);
  CHECK(std::accumulate(phi.begin(), phi.end(), 0.0) ==
        doctest::Approx(random.grand_value()).epsilon(1e-9));
}

TEST_CASE("imputation mode keeps individual rationality") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    CharacteristicGame game = nt::random_game(rng, 3, 0.0, 0.4);
    game.values[0b111] = 3.0;  // enough surplus for the imputation set
    const NucleolusSolution sol = nucleolus(game, AllocationDomain::imputation);
    CHECK(is_efficient(game, sol.allocation, 1e-9));
    for (int i = 0; i < 3; ++i)
      CHECK(sol.allocation[static_cast<std::size_t>(i)] >=
            game.values[1u << i] - 1e-7);
  }
}
