// Copyright 2026 The qcrb Authors
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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = QCRB_CLI_PATH;
const std::string kSpecs = QCRB_SPECS_DIR;

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qcrb_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, compute_json_and_csv) {
  const fs::path out = scratch("qubit.json");
  ASSERT_EQ(run("compute --spec " + kSpecs + "/qubit_smoke.json --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["records"][0]["bound"]["cumulative_rhs"].get<double>(), 0.25);
  EXPECT_EQ(j["records"][0]["bound"]["degenerate_orders"], nlohmann::json::array({3}));

  const fs::path csv = scratch("qubit.csv");
  ASSERT_EQ(run("compute --spec " + kSpecs + "/qubit_smoke.json --format csv --orders 1,3,5 --out " +
                csv.string()),
            0);
  EXPECT_EQ(slurp(csv).rfind("time,mu_2", 0), 0u);
}

TEST(Cli, exit_codes) {
  EXPECT_EQ(run("compute --spec " + kSpecs + "/bad_orders.json"), 2);
  EXPECT_EQ(run("compute --spec " + kSpecs + "/bad_weights.json"), 2);
  EXPECT_EQ(run("compute --spec " + kSpecs + "/qubit_smoke.json --orders 2"), 2);
  EXPECT_EQ(run("compute --spec /nonexistent/spec.json"), 2);
  EXPECT_EQ(run("compute --spec " + kSpecs + "/commuting.json"), 3);
  EXPECT_EQ(run("verify --dims 3 --samples 2 --tolerance 0"), 4);
  EXPECT_EQ(run("verify --dims 3 --samples 2"), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("verify --samples 0"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, sample_writes_a_matrix) {
  const fs::path out = scratch("gue.json");
  ASSERT_EQ(run("sample --dim 4 --ensemble gue --seed 9 --out " + out.string()), 0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["dimension"].get<int>(), 4);
  EXPECT_EQ(j["matrix"].size(), 4u);
  EXPECT_EQ(j["matrix"][0].size(), 4u);
  const std::string first = slurp(out);
  ASSERT_EQ(run("sample --dim 4 --ensemble gue --seed 9 --out " + out.string()), 0);
  EXPECT_EQ(slurp(out), first);
  EXPECT_EQ(run("sample --dim 4 --ensemble wishart --seed 9 --out " + out.string()), 2);
}

TEST(Cli, verify_body_is_reproducible) {
  const fs::path a = scratch("verify_a.json"), b = scratch("verify_b.json");
  const std::string args = "verify --seed 5 --dims 2..4 --samples 3";
  const std::string cmd_a = "\"" + kCli + "\" " + args + " >" + a.string() + " 2>/dev/null";
  const std::string cmd_b = "\"" + kCli + "\" " + args + " >" + b.string() + " 2>/dev/null";
  ASSERT_EQ(std::system(cmd_a.c_str()), 0);
  ASSERT_EQ(std::system(cmd_b.c_str()), 0);
  const auto ja = nlohmann::json::parse(slurp(a));
  const auto jb = nlohmann::json::parse(slurp(b));
  EXPECT_EQ(ja["body"].dump(), jb["body"].dump());
  EXPECT_TRUE(ja["body"]["passed"].get<bool>());
}
