// Copyright 2026 The TBSG Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tbsg/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tbsg {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(const std::string& message) {
  throw Error(ErrorCode::kParseError, message);
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_error(std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) parse_error(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_error(std::string("field \"") + key + "\" has the wrong type: " + e.what());
  }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

// Flattens rows of width `width` and checks the row count.
template <typename T>
std::vector<T> flatten_rows(const json& j, const char* key, std::size_t rows, std::size_t width) {
  const auto nested = field<std::vector<std::vector<T>>>(j, key);
  if (nested.size() != rows) {
    std::ostringstream os;
    os << "\"" << key << "\" has " << nested.size() << " rows, expected " << rows;
    throw Error(ErrorCode::kShapeMismatch, os.str());
  }
  std::vector<T> flat;
  flat.reserve(rows * width);
  for (std::size_t i = 0; i < rows; ++i) {
    if (nested[i].size() != width) {
      std::ostringstream os;
      os << "row " << i << " of \"" << key << "\" has " << nested[i].size() << " entries, expected "
         << width;
      throw Error(ErrorCode::kShapeMismatch, os.str());
    }
    flat.insert(flat.end(), nested[i].begin(), nested[i].end());
  }
  return flat;
}

template <typename T>
json nest_rows(const std::vector<T>& flat, std::size_t width) {
  json rows = json::array();
  for (std::size_t i = 0; i < flat.size(); i += width) {
    rows.push_back(std::vector<T>(flat.begin() + static_cast<std::ptrdiff_t>(i),
                                  flat.begin() + static_cast<std::ptrdiff_t>(i + width)));
  }
  return rows;
}

GameModel game_from(const json& j) {
  GameModel model;
  model.num_states = field<std::size_t>(j, "num_states");
  model.num_actions = field<std::size_t>(j, "num_actions");
  model.discount = field<double>(j, "gamma");
  for (const auto& name : field<std::vector<std::string>>(j, "owner")) {
    if (name == "max") {
      model.owner.push_back(Player::kMax);
    } else if (name == "min") {
      model.owner.push_back(Player::kMin);
    } else {
      parse_error("owner entries must be \"max\" or \"min\", got \"" + name + "\"");
    }
  }
  model.rewards = field<std::vector<double>>(j, "rewards");
  model.transitions = flatten_rows<double>(j, "transitions", model.num_states * model.num_actions,
                                           model.num_states);
  return validate_game(std::move(model));
}

GeneratorSpec generator_from(const json& j) {
  GeneratorSpec spec;
  spec.ns = field_or<std::size_t>(j, "ns", spec.ns);
  spec.na = field_or<std::size_t>(j, "na", spec.na);
  spec.gamma = field_or<double>(j, "gamma", spec.gamma);
  const auto owner = field_or<std::string>(j, "owner_pattern", "alternate");
  if (owner == "alternate") {
    spec.owner_pattern = OwnerPattern::kAlternate;
  } else if (owner == "random") {
    spec.owner_pattern = OwnerPattern::kRandom;
  } else if (owner == "all_max") {
    spec.owner_pattern = OwnerPattern::kAllMax;
  } else {
    parse_error("unknown owner_pattern \"" + owner + "\"");
  }
  spec.p_max = field_or<double>(j, "p_max", spec.p_max);
  spec.support = field_or<std::size_t>(j, "support", spec.support);
  const auto law = field_or<std::string>(j, "reward_law", "uniform01");
  if (law == "uniform01") {
    spec.reward_law = RewardLaw::kUniform01;
  } else if (law == "bernoulli") {
    spec.reward_law = RewardLaw::kBernoulli;
  } else if (law == "custom") {
    spec.reward_law = RewardLaw::kCustom;
  } else {
    parse_error("unknown reward_law \"" + law + "\"");
  }
  spec.bernoulli_p = field_or<double>(j, "bernoulli_p", spec.bernoulli_p);
  spec.custom_rewards = field_or<std::vector<double>>(j, "custom_rewards", {});
  spec.seed = field_or<std::uint64_t>(j, "seed", spec.seed);
  return spec;
}

}  // namespace

GameModel parse_game_json(std::string_view text) { return game_from(parse(text)); }

std::string game_to_json(const GameModel& model) {
  json j;
  j["num_states"] = model.num_states;
  j["num_actions"] = model.num_actions;
  std::vector<std::string> owner;
  for (Player p : model.owner) owner.emplace_back(to_string(p));
  j["owner"] = owner;
  j["gamma"] = model.discount;
  j["rewards"] = model.rewards;
  j["transitions"] = nest_rows(model.transitions, model.num_states);
  return j.dump(2) + "\n";
}

EmpiricalModel parse_counts_json(const GameModel& truth, std::string_view text) {
  const json j = parse(text);
  const auto n = field<std::size_t>(j, "n_per_pair");
  auto counts = flatten_rows<std::uint64_t>(j, "counts", truth.num_pairs(), truth.num_states);
  return empirical_from_counts(truth, n, std::move(counts));
}

std::string counts_to_json(const EmpiricalModel& empirical) {
  json j;
  j["n_per_pair"] = empirical.n_per_pair;
  j["counts"] = nest_rows(empirical.counts, empirical.estimate.num_states);
  return j.dump(2) + "\n";
}

GeneratorSpec parse_generator_json(std::string_view text) {
  const json j = parse(text);
  if (!j.contains("generator")) parse_error("missing field \"generator\"");
  return generator_from(j.at("generator"));
}

std::string generator_to_json(const GeneratorSpec& spec) {
  json g;
  g["ns"] = spec.ns;
  g["na"] = spec.na;
  g["gamma"] = spec.gamma;
  switch (spec.owner_pattern) {
    case OwnerPattern::kAlternate: g["owner_pattern"] = "alternate"; break;
    case OwnerPattern::kRandom: g["owner_pattern"] = "random"; break;
    case OwnerPattern::kAllMax: g["owner_pattern"] = "all_max"; break;
  }
  g["p_max"] = spec.p_max;
  g["support"] = spec.support;
  switch (spec.reward_law) {
    case RewardLaw::kUniform01: g["reward_law"] = "uniform01"; break;
    case RewardLaw::kBernoulli: g["reward_law"] = "bernoulli"; break;
    case RewardLaw::kCustom: g["reward_law"] = "custom"; break;
  }
  g["bernoulli_p"] = spec.bernoulli_p;
  if (spec.reward_law == RewardLaw::kCustom) g["custom_rewards"] = spec.custom_rewards;
  g["seed"] = spec.seed;
  json j;
  j["generator"] = g;
  return j.dump(2) + "\n";
}

GameModel parse_game_source(std::string_view text) {
  const json j = parse(text);
  if (j.contains("benchmark")) {
    const auto kind = field<std::string>(j, "benchmark");
    if (kind == "near_tie") {
      if (!j.contains("generator")) parse_error("near_tie benchmark needs a \"generator\"");
      return near_tie_game(generator_from(j.at("generator")), field<double>(j, "margin_lo"),
                           field<double>(j, "margin_hi"));
    }
    if (kind == "lottery") {
      return lottery_game(field<std::size_t>(j, "decision_states"),
                          field<std::size_t>(j, "num_actions"), field<double>(j, "gamma"),
                          field<double>(j, "margin_lo"), field<double>(j, "margin_hi"),
                          j.contains("return_prob") ? field<double>(j, "return_prob") : 0.01);
    }
    parse_error("unknown benchmark \"" + kind + "\"");
  }
  if (j.contains("generator")) return generate_game(generator_from(j.at("generator")));
  return game_from(j);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) parse_error("cannot write " + path.string());
  out << text;
  if (!out) parse_error("failed writing " + path.string());
}

GameModel load_game(const std::filesystem::path& path) {
  return parse_game_source(read_text_file(path));
}

}  // namespace tbsg
