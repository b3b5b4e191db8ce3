#include "nucred/env_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nucred {

int EnvModel::joint_action_count() const {
  int total = 1;
  for (int a : num_actions) total *= a;
  return total;
}

int EnvModel::joint_index(std::span<const int> per_agent) const {
  if (static_cast<int>(per_agent.size()) != num_agents)
    throw std::invalid_argument("joint action has wrong arity");
  int idx = 0;
  for (int i = num_agents - 1; i >= 0; --i) {
    const int a = per_agent[static_cast<std::size_t>(i)];
    if (a < 0 || a >= num_actions[static_cast<std::size_t>(i)])
      throw std::invalid_argument("agent action out of range");
    idx = idx * num_actions[static_cast<std::size_t>(i)] + a;
  }
  return idx;
}

std::vector<int> EnvModel::joint_decompose(int joint) const {
  std::vector<int> out(static_cast<std::size_t>(num_agents), 0);
  for (int i = 0; i < num_agents; ++i) {
    out[static_cast<std::size_t>(i)] = joint % num_actions[static_cast<std::size_t>(i)];
    joint /= num_actions[static_cast<std::size_t>(i)];
  }
  return out;
}

void EnvModel::validate() const {
  if (num_states < 1) throw std::invalid_argument("model needs at least one state");
  if (num_agents < 1 || num_agents > kMaxPlayers)
    throw std::invalid_argument("agent count out of range");
  if (static_cast<int>(num_actions.size()) != num_agents)
    throw std::invalid_argument("per-agent action list has wrong length");
  for (int a : num_actions)
    if (a < 1) throw std::invalid_argument("every agent needs at least one action");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("gamma must lie in (0, 1)");
  const int na = joint_action_count();
  auto check_dims = [&](std::size_t outer, const char* what) {
    if (static_cast<int>(outer) != num_states)
      throw std::invalid_argument(std::string(what) + ": wrong state dimension");
  };
  check_dims(reward.size(), "reward");
  check_dims(transition.size(), "transition");
  check_dims(cs.size(), "coalition structure");
  if (static_cast<int>(terminal.size()) != num_states)
    throw std::invalid_argument("terminal flags: wrong state dimension");
  for (int s = 0; s < num_states; ++s) {
    if (static_cast<int>(reward[static_cast<std::size_t>(s)].size()) != na ||
        static_cast<int>(transition[static_cast<std::size_t>(s)].size()) != na ||
        static_cast<int>(cs[static_cast<std::size_t>(s)].size()) != na)
      throw std::invalid_argument("per-action tables have wrong joint-action dimension");
    for (int a = 0; a < na; ++a) {
      const double r = reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      if (!std::isfinite(r)) throw std::invalid_argument("rewards must be finite");
      const auto& row = transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
      if (static_cast<int>(row.size()) != num_states)
        throw std::invalid_argument("transition row has wrong length");
      double sum = 0.0;
      for (double p : row) {
        if (p < -1e-12) throw std::invalid_argument("negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("transition row does not sum to one");
      cs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].validate(num_agents);
    }
  }
}

EnvModel EnvModel::parse(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  EnvModel model;
  model.num_states = j.at("num_states").get<int>();
  model.num_agents = j.at("num_agents").get<int>();
  model.num_actions = j.at("num_actions").get<std::vector<int>>();
  model.gamma = j.value("gamma", 0.9);
  model.terminal.assign(static_cast<std::size_t>(model.num_states), 0);
  if (j.contains("terminal")) {
    const auto flags = j.at("terminal").get<std::vector<bool>>();
    if (static_cast<int>(flags.size()) != model.num_states)
      throw std::invalid_argument("model file: terminal list has wrong length");
    for (std::size_t s = 0; s < flags.size(); ++s) model.terminal[s] = flags[s] ? 1 : 0;
  }
  const int na = model.joint_action_count();
  model.reward.assign(static_cast<std::size_t>(model.num_states),
                      std::vector<double>(static_cast<std::size_t>(na), 0.0));
  model.transition.assign(
      static_cast<std::size_t>(model.num_states),
      std::vector<std::vector<double>>(static_cast<std::size_t>(na),
                                       std::vector<double>(static_cast<std::size_t>(model.num_states), 0.0)));
  model.cs.assign(static_cast<std::size_t>(model.num_states),
                  std::vector<CoalitionStructure>(static_cast<std::size_t>(na)));
  for (const auto& e : j.at("rewards")) {
    const int s = e.at(0).get<int>(), a = e.at(1).get<int>();
    model.reward.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a)) =
        e.at(2).get<double>();
  }
  for (const auto& e : j.at("transitions")) {
    const int s = e.at(0).get<int>(), a = e.at(1).get<int>(), s2 = e.at(2).get<int>();
    model.transition.at(static_cast<std::size_t>(s))
        .at(static_cast<std::size_t>(a))
        .at(static_cast<std::size_t>(s2)) = e.at(3).get<double>();
  }
  for (const auto& e : j.at("cs")) {
    const int s = e.at(0).get<int>(), a = e.at(1).get<int>();
    CoalitionStructure structure;
    for (const auto& mask : e.at(2))
      structure.blocks.push_back(Coalition(mask.get<std::uint32_t>()));
    model.cs.at(static_cast<std::size_t>(s)).at(static_cast<std::size_t>(a)) =
        std::move(structure);
  }
  model.validate();
  return model;
}

EnvModel EnvModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void EnvModel::save(const std::string& path) const {
  nlohmann::json j;
  j["num_states"] = num_states;
  j["num_agents"] = num_agents;
  j["num_actions"] = num_actions;
  j["gamma"] = gamma;
  auto& term = j["terminal"] = nlohmann::json::array();
  for (std::uint8_t t : terminal) term.push_back(t != 0);
  auto& rewards = j["rewards"] = nlohmann::json::array();
  auto& transitions = j["transitions"] = nlohmann::json::array();
  auto& structures = j["cs"] = nlohmann::json::array();
  const int na = joint_action_count();
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < na; ++a) {
      rewards.push_back({s, a, reward[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]});
      for (int s2 = 0; s2 < num_states; ++s2) {
        const double p =
            transition[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)][static_cast<std::size_t>(s2)];
        if (p != 0.0) transitions.push_back({s, a, s2, p});
      }
      nlohmann::json masks = nlohmann::json::array();
      for (const Coalition& c : cs[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)].blocks)
        masks.push_back(c.members);
      structures.push_back({s, a, masks});
    }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump() << "\n";
}

}  // namespace nucred
