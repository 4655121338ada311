// Copyright 2026 The ErgoRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ergorisk/cli/config.hpp"
#include "ergorisk/errors.hpp"

namespace ergorisk::cli {
namespace {

const char* kScalar = R"({
  "seed": 5,
  "system": {"A": [[2.0]], "B": [[1.0]], "H": [[1.0]]},
  "risk": {"beta_bar": {"ratio": 0.8}}
})";

ErrorCode code_of(const std::string& text, std::string* message = nullptr) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::kIo;
}

std::string with(const std::string& base, const std::string& pointer,
                 const nlohmann::json& value) {
  nlohmann::json j = nlohmann::json::parse(base);
  j[nlohmann::json::json_pointer(pointer)] = value;
  return j.dump();
}

TEST(Config, DefaultsAreFilledIn) {
  const ExperimentConfig c = parse_config_text(kScalar);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.noise.kind, NoiseKind::kGaussian);
  EXPECT_EQ(c.gain.source, GainSource::kSolved);
  EXPECT_EQ(c.solver.eps, 1e-8);
  const nlohmann::json j = to_json(c);
  EXPECT_EQ(j["cost"]["Q"], nlohmann::json::parse("[[1.0]]"));
  EXPECT_EQ(j["risk"]["Rc"], nlohmann::json::parse("[[0.0]]"));
  EXPECT_EQ(j["risk"]["beta_bar"]["ratio"], 0.8);
}

TEST(Config, RoundTripIsIdentity) {
  const ExperimentConfig c = parse_config_text(kScalar);
  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config_text(once));
  EXPECT_EQ(once, twice);
}

TEST(Config, ShippedConfigsRoundTrip) {
  int seen = 0;
  for (const auto& entry :
       std::filesystem::directory_iterator(ERGORISK_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const ExperimentConfig c = load_config(entry.path().string());
    const std::string once = serialize_config(c);
    EXPECT_EQ(serialize_config(parse_config_text(once)), once)
        << entry.path();
    EXPECT_EQ(config_hash(parse_config_text(once)), config_hash(c));
  }
  EXPECT_GE(seen, 4);
}

TEST(Config, UnknownKeysAreRejected) {
  std::string message;
  EXPECT_EQ(code_of(with(kScalar, "/colour", 1), &message), ErrorCode::kConfig);
  EXPECT_NE(message.find("'colour'"), std::string::npos);
  EXPECT_EQ(code_of(with(kScalar, "/solver/epsilon", 1e-6), &message),
            ErrorCode::kConfig);
  EXPECT_NE(message.find("solver.epsilon"), std::string::npos);
}

TEST(Config, MalformedMatricesNameTheField) {
  std::string message;
  EXPECT_EQ(code_of(with(kScalar, "/system/A",
                         nlohmann::json::parse("[[1, 2], [3]]")),
                    &message),
            ErrorCode::kShape);
  EXPECT_NE(message.find("system.A"), std::string::npos);

  const std::string two = R"({
    "system": {"A": [[0.5, 0], [0, 0.5]], "B": [[1], [0], [0]], "H": [[1, 0], [0, 1]]}
  })";
  EXPECT_EQ(code_of(two, &message), ErrorCode::kShape);
  EXPECT_NE(message.find("system.B"), std::string::npos);

  EXPECT_EQ(code_of(with(with(kScalar, "/gain/source", "explicit"), "/gain/K",
                         nlohmann::json::parse("[[1, 2]]")),
                    &message),
            ErrorCode::kShape);
  EXPECT_NE(message.find("gain.K"), std::string::npos);

  EXPECT_EQ(code_of(with(kScalar, "/cost/Q", "eye"), &message),
            ErrorCode::kShape);
  EXPECT_NE(message.find("cost.Q"), std::string::npos);
}

TEST(Config, SectionLevelValidation) {
  EXPECT_EQ(code_of(with(kScalar, "/risk/beta_bar",
                         nlohmann::json{{"ratio", 1}, {"absolute", 2}})),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of(with(kScalar, "/noise", nlohmann::json{{"kind", "student_t"}})),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of(with(kScalar, "/noise/kind", "cauchy")), ErrorCode::kConfig);
  EXPECT_EQ(code_of(with(kScalar, "/system/generator",
                         nlohmann::json{{"n", 2}})),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of(with(kScalar, "/gain/source", "explicit")),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of(with(kScalar, "/simulation/horizon", 0)),
            ErrorCode::kConfig);
  EXPECT_EQ(code_of("{not json"), ErrorCode::kConfig);
}

TEST(Config, HeavyTailsRefusedWithTheOffendingNu) {
  const ExperimentConfig c = parse_config_text(
      with(kScalar, "/noise", nlohmann::json{{"kind", "student_t"}, {"nu", 3}}));
  try {
    build_system(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRiskMomentUnavailable);
    EXPECT_NE(std::string(e.what()).find("nu = 3"), std::string::npos);
  }
}

TEST(Config, HashIgnoresOutputButNotSeed) {
  const ExperimentConfig a = parse_config_text(kScalar);
  ExperimentConfig b = a;
  b.output.dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, GeneratorBuildsDeterministically) {
  const std::string text = R"({
    "system": {"generator": {"n": 3, "m": 2, "d": 3, "rho_target": 0.8, "seed": 4}}
  })";
  const LinearSystem a = build_system(parse_config_text(text));
  const LinearSystem b = build_system(parse_config_text(text));
  EXPECT_EQ(a.a(), b.a());
  EXPECT_EQ(a.state_dim(), 3);
  EXPECT_EQ(a.input_dim(), 2);
}

TEST(Config, BetaBarResolution) {
  const ExperimentConfig c = parse_config_text(kScalar);
  const ControlProblem p = build_problem(c);
  const double gamma =
      gamma_n_analytic(p.sys, lqr_solve(p.sys, p.cost), p.risk);
  EXPECT_DOUBLE_EQ(resolve_beta_bar(c, p), 0.8 * gamma);
  const ExperimentConfig abs = parse_config_text(
      with(kScalar, "/risk/beta_bar", nlohmann::json{{"absolute", 7.5}}));
  EXPECT_EQ(resolve_beta_bar(abs, p), 7.5);
}

const AssumptionCheck& find(const std::vector<AssumptionCheck>& checks,
                            const std::string& id) {
  for (const auto& c : checks) {
    if (c.id == id) return c;
  }
  throw std::runtime_error("missing check " + id);
}

TEST(Assumptions, AllPassOnFeasibleScalar) {
  const auto checks = check_assumptions(parse_config_text(kScalar));
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.id << ": " << c.detail;
  for (const char* id : {"A1", "A2", "A3", "A4"}) EXPECT_NO_THROW(find(checks, id));
}

TEST(Assumptions, EachFailureIsReported) {
  const std::string unstab = R"({
    "system": {"A": [[1.5, 0], [0, 0.2]], "B": [[0], [1]], "H": [[1, 0], [0, 1]]}
  })";
  auto checks = check_assumptions(parse_config_text(unstab));
  EXPECT_FALSE(find(checks, "A2").passed);
  EXPECT_FALSE(find(checks, "A4").passed);

  checks = check_assumptions(parse_config_text(
      with(kScalar, "/cost/Q", nlohmann::json::parse("[[0.0]]"))));
  EXPECT_FALSE(find(checks, "A3").passed);

  const std::string thin_h = R"({
    "system": {"A": [[0.5, 0], [0, 0.5]], "B": [[1], [1]], "H": [[1], [0]]}
  })";
  checks = check_assumptions(parse_config_text(thin_h));
  EXPECT_FALSE(find(checks, "A3").passed);

  checks = check_assumptions(parse_config_text(
      with(kScalar, "/risk/beta_bar", nlohmann::json{{"absolute", 0.5}})));
  EXPECT_FALSE(find(checks, "A4").passed);
  EXPECT_TRUE(find(checks, "A2").passed);

  checks = check_assumptions(parse_config_text(with(
      kScalar, "/noise", nlohmann::json{{"kind", "student_t"}, {"nu", 4}})));
  EXPECT_FALSE(find(checks, "A1").passed);
}

}  // namespace
}  // namespace ergorisk::cli
