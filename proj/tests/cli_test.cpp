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

#include "tbsg/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fixtures.hpp"
#include "tbsg/io.hpp"

namespace tbsg {
namespace {

namespace fs = std::filesystem;

const fs::path kData = TBSG_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string game(const char* name) { return (kData / "games" / name).string(); }

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tbsg_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(GameJson, RoundTripsExactly) {
  const auto m = fixtures::deterministic_2x2();
  EXPECT_EQ(parse_game_json(game_to_json(m)), m);
  EXPECT_EQ(game_to_json(parse_game_json(game_to_json(m))), game_to_json(m));
}

TEST(GameJson, RejectsMalformedInput) {
  EXPECT_THROW(parse_game_json("{"), Error);
  EXPECT_THROW(parse_game_json(R"({"num_states": 1})"), Error);
  try {
    parse_game_json(R"({"num_states":1,"num_actions":1,"owner":["max"],"gamma":0.5,
                        "rewards":[0.5],"transitions":[[0.5]]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRowNotStochastic);
  }
}

TEST(CountsJson, RoundTrips) {
  const auto m = fixtures::duplicate_actions();
  const auto e = estimate_model(m, 13, 4);
  const auto back = parse_counts_json(m, counts_to_json(e));
  EXPECT_EQ(back.counts, e.counts);
  EXPECT_EQ(back.estimate, e.estimate);
  EXPECT_THROW(parse_counts_json(fixtures::deterministic_2x2(), R"({"n_per_pair":2,"counts":[[2]]})"),
               Error);
}

TEST(GeneratorJson, RoundTripsAndFeedsTheLoader) {
  GeneratorSpec g;
  g.ns = 5;
  g.na = 3;
  g.gamma = 0.8;
  g.owner_pattern = OwnerPattern::kRandom;
  g.p_max = 0.3;
  g.support = 2;
  g.seed = 99;
  const auto text = generator_to_json(g);
  EXPECT_EQ(generator_to_json(parse_generator_json(text)), text);
  EXPECT_EQ(parse_game_source(text), generate_game(g));
}

TEST(Corpus, EveryBundledFileLoads) {
  std::size_t files = 0;
  for (const auto& sub : {"games", "generators", "benchmarks"}) {
    for (const auto& entry : fs::directory_iterator(kData / sub)) {
      EXPECT_NO_THROW(load_game(entry.path())) << entry.path();
      ++files;
    }
  }
  EXPECT_EQ(files, 27u);
}

TEST(Cli, SolvePrintsUnitGapOnOneStateGame) {
  const auto r = run({"solve", game("one_state_two_actions.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("qstar: 2 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("gap: 1\n"), std::string::npos);
  EXPECT_EQ(r.err.rfind("# tbsg-v1 command=solve seed=0", 0), 0u);
}

TEST(Cli, BoundPrintsInstantiatedSampleSize) {
  const auto r = run({"bound", "--states", "2", "--actions", "2", "--gamma", "0.5", "--eps", "1",
                      "--delta", "0.5", "--constant", "1"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "89\n");
}

TEST(Cli, BoundRangeViolationIsAValidationError) {
  const auto r = run({"bound", "--kind", "exact", "--states", "2", "--actions", "2", "--gamma",
                      "0.75", "--eps", "3"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("RangeViolation"), std::string::npos);
}

TEST(Cli, NTotalWarnsAboutFloorDivision) {
  const auto r = run({"plugin", game("deterministic_2x2.json"), "--n-total", "1000"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.err.find("warning: --n-total 1000"), std::string::npos);
  EXPECT_NE(r.err.find("250 per pair"), std::string::npos);
  EXPECT_NE(r.out.find("n_per_pair: 250\n"), std::string::npos);
}

TEST(Cli, PluginReusesCountsSidecar) {
  const auto dir = temp_dir("counts");
  const auto counts = (dir / "c.json").string();
  ASSERT_EQ(run({"--seed", "5", "sample", game("duplicate_actions.json"), "--n", "20", "--out", counts}).code,
            kExitOk);
  const auto direct = run({"--seed", "5", "plugin", game("duplicate_actions.json"), "--n", "20"});
  const auto reused = run({"plugin", game("duplicate_actions.json"), "--counts", counts});
  EXPECT_EQ(direct.code, kExitOk);
  EXPECT_EQ(direct.out, reused.out);
}

TEST(Cli, ErrorsMapToExitCodes) {
  EXPECT_EQ(run({}).code, kExitValidation);
  EXPECT_EQ(run({"solve"}).code, kExitValidation);
  EXPECT_EQ(run({"solve", "/nonexistent/game.json"}).code, kExitValidation);
  EXPECT_EQ(run({"--solver", "lp", "solve", game("zero_game.json")}).code, kExitValidation);
  EXPECT_EQ(run({"perturb", game("zero_game.json"), "--xi", "-1"}).code, kExitValidation);
  EXPECT_EQ(run({"gap", game("deterministic_2x2.json"), "--max-strategy", "5,0"}).code, kExitValidation);
}

TEST(Cli, SolverFailureExitsTwo) {
  // Value iteration cannot reach this accuracy within its iteration cap.
  const auto dir = temp_dir("solver_failure");
  auto m = fixtures::one_state_two_actions();
  m.discount = 0.999999;
  const auto path = dir / "slow.json";
  write_text_file(path, game_to_json(m));
  const auto r = run({"--solver", "vi", "solve", path.string()});
  EXPECT_EQ(r.code, kExitSolver);
  EXPECT_NE(r.err.find("NoConvergence"), std::string::npos);
}

TEST(Cli, TraceTauWritesCsv) {
  const auto r = run({"trace-tau", game("deterministic_2x2.json"), "--points", "5"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out.rfind("tau,piece_id,action,qstar,slope_fit,intercept_fit\n", 0), 0u);
}

TEST(Cli, ScalingWritesCsvAndSummary) {
  const auto r = run({"scaling", game("deterministic_2x2.json"), "--min-exp", "2", "--max-exp", "4",
                      "--trials", "2"});
  EXPECT_EQ(r.code, kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n_per_pair,total_n,seed,deviation_max,exact_match,gap,wall_ms");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_NE(r.err.find("recovery_budget=4"), std::string::npos);
}

TEST(Cli, VerifyLemmasReportsJson) {
  const auto r = run({"verify-lemmas", game("deterministic_2x2.json"), "--trials", "3", "--gap-trials",
                      "20", "--strict"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_NE(r.out.find("\"format\": \"tbsg-lemma-report-v1\""), std::string::npos);
  EXPECT_NE(r.out.find("value_difference_identity"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = temp_dir("determinism");
  const std::vector<std::vector<std::string>> commands = {
      {"--seed", "3", "sample", game("two_state_cycle.json"), "--n", "9"},
      {"--seed", "3", "--xi", "0.05", "plugin", game("duplicate_actions.json"), "--n", "40"},
      {"--seed", "3", "--xi", "0.05", "perturb", game("zero_game.json")},
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      auto args = commands[i];
      const auto path = dir / ("out" + std::to_string(i) + "_" + std::to_string(rep));
      args.insert(args.begin(), {"--out", path.string()});
      ASSERT_EQ(run(args).code, kExitOk);
      const auto text = read_text_file(path);
      if (rep == 0) {
        first = text;
      } else {
        EXPECT_EQ(text, first) << commands[i][3];
      }
    }
  }
}

}  // namespace
}  // namespace tbsg
