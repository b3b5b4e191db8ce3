#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "nucred/characteristic_game.hpp"
#include "test_support.hpp"

using namespace nucred;
namespace nt = nucred::testing;

namespace {

CharacteristicGame two_player_split() {
  CharacteristicGame game(2);
  game.values[0b01] = 0.0;
  game.values[0b10] = 0.0;
  game.values[0b11] = 10.0;
  return game;
}

}  // namespace

TEST_CASE("excess direct substitution") {
  const CharacteristicGame additive = nt::additive_game(3);
  const PayoffVector ones{1.0, 1.0, 1.0};
  CHECK(excess(additive, Coalition(0b011u), ones) == doctest::Approx(0.0));

  const CharacteristicGame split = two_player_split();
  CHECK(excess(split, Coalition(0b01u), {5.0, 5.0}) == doctest::Approx(-5.0));
  CHECK(excess(split, Coalition::empty(), {5.0, 5.0}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(excess(split, Coalition(0b01u), {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("excess sequence sorted over all coalitions") {
  const CharacteristicGame split = two_player_split();
  const ExcessSequence seq = excess_sequence(split, {5.0, 5.0});
  CHECK(seq.values == std::vector<double>{0.0, 0.0, -5.0, -5.0});

  CharacteristicGame solo(1);
  solo.values[1] = 3.0;
  CHECK(excess_sequence(solo, {3.0}).values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("excess sequence equals sorted naive enumeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const CharacteristicGame game = nt::random_game(rng, 2 + trial % 3);
    const PayoffVector x = nt::random_efficient(rng, game);
    std::vector<double> naive = nt::naive_excesses(game, x);
    std::sort(naive.begin(), naive.end(), std::greater<double>());
    const ExcessSequence seq = excess_sequence(game, x);
    REQUIRE(seq.values.size() == naive.size());
    for (std::size_t i = 0; i < naive.size(); ++i)
      CHECK(seq.values[i] == doctest::Approx(naive[i]).epsilon(1e-12));
    // Sorted non-increasing.
    for (std::size_t i = 1; i < seq.values.size(); ++i)
      CHECK(seq.values[i - 1] >= seq.values[i]);
  }
}

TEST_CASE("lexicographic comparison") {
  const ExcessSequence a{{1.0, 0.0, -2.0}};
  const ExcessSequence b{{1.0, -1.0, 0.0}};
  CHECK(lex_compare(a, b) == LexOrder::greater);
  CHECK(lex_compare(b, a) == LexOrder::less);
  CHECK(lex_compare(a, a) == LexOrder::equal);
  CHECK(lex_compare(ExcessSequence{{0.0, 0.0}}, ExcessSequence{{1.0, -5.0}}) == LexOrder::less);
  CHECK_THROWS_AS(lex_compare(a, ExcessSequence{{1.0}}), std::invalid_argument);
  // Within-tolerance entries are treated as ties.
  const ExcessSequence near_a{{1.0 + 1e-10, 0.0, -2.0}};
  CHECK(lex_compare(a, near_a) == LexOrder::equal);
}

TEST_CASE("core membership") {
  const CharacteristicGame majority = nt::majority_game();
  // Pair coalitions keep excess 1 - 2/3 > 0, so the equal split is outside.
  CHECK(!core_contains(majority, {1.0 / 3, 1.0 / 3, 1.0 / 3}));

  const CharacteristicGame additive = nt::additive_game(4);
  CHECK(core_contains(additive, {1.0, 1.0, 1.0, 1.0}));

  CharacteristicGame skew(2);
  skew.values[0b01] = 6.0;
  skew.values[0b11] = 10.0;
  CHECK(!core_contains(skew, {5.0, 5.0}));

  CHECK_THROWS_AS(core_contains(additive, {1.0, 1.0, 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("game validation and file round trip") {
  CharacteristicGame bad(2);
  bad.values[0] = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const CharacteristicGame game = nt::majority_game();
  const auto path = std::filesystem::temp_directory_path() / "nucred_test_game.json";
  save_game(game, path.string());
  const CharacteristicGame loaded = load_game(path.string());
  CHECK(loaded.n == game.n);
  CHECK(loaded.values == game.values);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(parse_game("{\"n\": 2, \"values\": [[0, 0.0], [1, 1.0], [2, 1.0]]}"),
                  std::invalid_argument);  // mask 3 missing
  CHECK_THROWS_AS(parse_game("{\"n\": 2, \"values\": [[0,0],[1,1],[1,1],[3,2]]}"),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(parse_game("not json"), std::invalid_argument);
}
