#include "nucred/characteristic_game.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nucred {

void CharacteristicGame::validate() const {
  if (n < 1 || n > kMaxPlayers)
    throw std::invalid_argument("player count must be in [1, 16]");
  if (values.size() != (std::size_t{1} << n))
    throw std::invalid_argument("value table must cover all 2^n coalitions");
  if (std::abs(values[0]) > 0.0)
    throw std::invalid_argument("empty coalition must have value 0");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("coalition values must be finite");
}

double excess(const CharacteristicGame& game, Coalition c, const PayoffVector& x) {
  if (static_cast<int>(x.size()) != game.n)
    throw std::invalid_argument("payoff vector length does not match player count");
  if (c.is_empty()) return 0.0;
  double paid = 0.0;
  for (std::uint32_t m = c.members; m != 0; m &= m - 1)
    paid += x[static_cast<std::size_t>(std::countr_zero(m))];
  return game.value(c) - paid;
}

ExcessSequence excess_sequence(const CharacteristicGame& game, const PayoffVector& x) {
  if (static_cast<int>(x.size()) != game.n)
    throw std::invalid_argument("payoff vector length does not match player count");
  ExcessSequence seq;
  seq.values.resize(game.num_coalitions());
  // Subset-sum recurrence: payoff(C) built from C minus its lowest member.
  std::vector<double> paid(game.num_coalitions(), 0.0);
  for (std::uint32_t mask = 1; mask < game.num_coalitions(); ++mask) {
    const int low = std::countr_zero(mask);
    paid[mask] = paid[mask & (mask - 1)] + x[static_cast<std::size_t>(low)];
  }
  for (std::uint32_t mask = 0; mask < game.num_coalitions(); ++mask)
    seq.values[mask] = game.values[mask] - paid[mask];
  std::sort(seq.values.begin(), seq.values.end(), std::greater<double>());
  return seq;
}

LexOrder lex_compare(const ExcessSequence& a, const ExcessSequence& b) {
  if (a.values.size() != b.values.size())
    throw std::invalid_argument("excess sequences have different lengths");
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    if (d > kComparisonTol) return LexOrder::greater;
    if (d < -kComparisonTol) return LexOrder::less;
  }
  return LexOrder::equal;
}

bool is_efficient(const CharacteristicGame& game, const PayoffVector& x, double tol) {
  if (static_cast<int>(x.size()) != game.n) return false;
  double sum = 0.0;
  for (double v : x) sum += v;
  return std::abs(sum - game.grand_value()) <= tol;
}

bool core_contains(const CharacteristicGame& game, const PayoffVector& x) {
  if (!is_efficient(game, x))
    throw std::invalid_argument("core test requires an efficient payoff vector");
  for (std::uint32_t mask = 1; mask < game.num_coalitions(); ++mask)
    if (excess(game, Coalition(mask), x) > kComparisonTol) return false;
  return true;
}

CharacteristicGame parse_game(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("game file is not valid JSON: ") + e.what());
  }
  if (!j.contains("n") || !j.contains("values"))
    throw std::invalid_argument("game file must have fields 'n' and 'values'");
  const int n = j.at("n").get<int>();
  if (n < 1 || n > kMaxPlayers) throw std::invalid_argument("game file: n out of range [1, 16]");
  CharacteristicGame game(n);
  std::vector<bool> seen(game.num_coalitions(), false);
  for (const auto& entry : j.at("values")) {
    if (!entry.is_array() || entry.size() != 2)
      throw std::invalid_argument("game file: each value entry must be [mask, value]");
    const auto mask = entry.at(0).get<std::uint64_t>();
    if (mask >= game.num_coalitions())
      throw std::invalid_argument("game file: coalition mask out of range");
    if (seen[mask]) throw std::invalid_argument("game file: duplicate coalition mask");
    seen[mask] = true;
    game.values[mask] = entry.at(1).get<double>();
  }
  for (std::size_t mask = 0; mask < seen.size(); ++mask)
    if (!seen[mask]) {
      std::ostringstream msg;
      msg << "game file: coalition mask " << mask << " missing (all 2^n required)";
      throw std::invalid_argument(msg.str());
    }
  game.validate();
  return game;
}

CharacteristicGame load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_game(buf.str());
}

void save_game(const CharacteristicGame& game, const std::string& path) {
  nlohmann::json j;
  j["n"] = game.n;
  auto& vals = j["values"] = nlohmann::json::array();
  for (std::size_t mask = 0; mask < game.num_coalitions(); ++mask)
    vals.push_back({mask, game.values[mask]});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write game file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace nucred
