/*
 * Copyright 2026 The fedreg Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fedreg_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    std::ofstream csv(dir_ / "line.csv");
    csv << "x,y\n";
    for (int i = 0; i < 60; ++i) {
      const double x = -3 + 0.1 * i;
      csv << x << ',' << 2 * x + 1 << '\n';
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(const std::string& args) {
    const std::string cmd = std::string(FEDREG_CLI_PATH) + " " + args + " > " +
                            (dir_ / "out.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string Output() {
    std::ifstream in(dir_ / "out.txt");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  std::string Path(const char* name) { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, TrainPredictRoundTrip) {
  ASSERT_EQ(Run("train --bits 2048 --dataset " + Path("line.csv") +
                " --users 6 --per-user 5 --rounds 40 --report " + Path("r.jsonl") +
                " --model-out " + Path("model.json")),
            0)
      << Output();
  EXPECT_TRUE(fs::exists(Path("r.jsonl")));
  std::ifstream model(Path("model.json"));
  const auto j = nlohmann::json::parse(model);
  EXPECT_EQ(j["kind"], "linear");
  ASSERT_EQ(Run("predict --bits 2048 --model-file " + Path("model.json") +
                " --input 1.0 --show-wire"),
            0)
      << Output();
  const std::string out = Output();
  EXPECT_NE(out.find("enc_input"), std::string::npos);
  EXPECT_NE(out.find("enc_output"), std::string::npos);
}

TEST_F(CliTest, ProtocolAbortExitsTwo) {
  EXPECT_EQ(Run("train --bits 2048 --dataset " + Path("line.csv") +
                " --users 6 --per-user 5 --rounds 3 --dropout-frac 0.3"),
            2)
      << Output();
  EXPECT_NE(Output().find("agg-below-t-plus-rho"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitThree) {
  EXPECT_EQ(Run("train --dataset " + Path("line.csv") + " --users 50 --per-user 5"), 3);
  EXPECT_EQ(Run("train --dataset " + Path("missing.csv") + " --users 6 --per-user 5"), 3);
  EXPECT_EQ(Run("train --bits 1024 --dataset " + Path("line.csv") +
                " --users 6 --per-user 5"),
            3);
  EXPECT_EQ(Run("train --dataset " + Path("line.csv") +
                " --users 6 --per-user 5 --cohort 3"),
            3);
  EXPECT_EQ(Run("train --model cubic --dataset x --users 1 --per-user 1"), 3);
  EXPECT_EQ(Run("predict --model-file " + Path("missing.json") + " --input 1"), 3);
  EXPECT_EQ(Run("bench nope"), 3);
}

TEST_F(CliTest, LeakageDemoAndBench) {
  EXPECT_EQ(Run("leakage-demo --n 4 --seed 3"), 0) << Output();
  EXPECT_EQ(Run("bench slg --bits 2048 --model logistic --n 2 --d 2"), 0) << Output();
  EXPECT_NE(Output().find("match"), std::string::npos);
  EXPECT_EQ(Run("keygen --bits 2048 --out " + Path("key.bin")), 0) << Output();
  EXPECT_TRUE(fs::exists(Path("key.bin")));
}

}  // namespace
