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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedreg/bench.h"
#include "fedreg/error.h"
#include "fedreg/experiment.h"
#include "test_support.h"

namespace fedreg {
namespace {

Dataset Line(size_t rows, uint64_t seed) {
  Csprng rng(seed, "line");
  Dataset d;
  d.names = {"x", "y"};
  for (size_t i = 0; i < rows; ++i) {
    const double x = testing::Real(rng, -3, 3);
    d.x.push_back({x});
    d.y.push_back(2 * x + 1);
  }
  return d;
}

ExperimentConfig LineConfig(unsigned rounds) {
  ExperimentConfig cfg;
  cfg.train.kind = ModelKind::kLinear;
  cfg.train.rounds = rounds;
  cfg.train.modulus_bits = 2048;
  cfg.train.seed = 51;
  cfg.users = 6;
  cfg.per_user = 5;
  return cfg;
}

TEST(Experiment, RecoversLine) {
  ExperimentConfig cfg = LineConfig(100);
  cfg.run_oracle = true;
  const ExperimentReport rep = RunExperiment(cfg, Line(60, 52));
  ASSERT_TRUE(rep.result.ok()) << fedtrain::AbortReasonName(rep.result.abort);
  EXPECT_EQ(rep.metric, "rmse");
  EXPECT_LT(rep.score, 0.1);
  ASSERT_TRUE(rep.oracle_score);
  EXPECT_NEAR(rep.score, *rep.oracle_score, 1e-3);
  EXPECT_EQ(rep.train_rows, 30u);
  EXPECT_EQ(rep.test_rows, 18u);
  EXPECT_NEAR(PredictPlain(rep.result, std::vector<double>{1.0}, ModelKind::kLinear),
              3.0, 0.1);
}

TEST(Experiment, TotalsAreRoundSums) {
  const ExperimentReport rep = RunExperiment(LineConfig(4), Line(60, 53));
  ASSERT_TRUE(rep.result.ok());
  HeOpCounts user, server;
  uint64_t up = 0, down = 0, agg = 0;
  for (const auto& r : rep.result.rounds) {
    user += r.user_ops;
    server += r.server_ops;
    up += r.bytes_up;
    down += r.bytes_down;
    agg += r.agg_bytes;
  }
  EXPECT_EQ(rep.user_ops, user);
  EXPECT_EQ(rep.server_ops, server);
  EXPECT_EQ(rep.bytes_up, up);
  EXPECT_EQ(rep.bytes_down, down);
  EXPECT_EQ(rep.agg_bytes, agg);
}

TEST(Experiment, BytesDecomposeIntoSlgAndAggregation) {
  const ExperimentReport rep = RunExperiment(LineConfig(3), Line(60, 54));
  ASSERT_TRUE(rep.result.ok());
  const auto& keys = testing::Keys();
  const uint64_t ct_bytes = keys.pk->ciphertext_bytes();
  const uint64_t n = 1;
  for (const auto& r : rep.result.rounds) {
    const uint64_t m = r.cohort.size();
    EXPECT_EQ(r.ciphertext_bits, m * 2 * (n + 1) * ct_bytes * 8);
    EXPECT_EQ(r.user_ops,
              (HeOpCounts{m * (2 * (n + 1) * 5 - (n + 1)), m * 2 * n * 5,
                          m * (5 + n + 1), 0}));
    // Two ciphertext messages per cohort member, each with an envelope
    // header.
    EXPECT_EQ(r.bytes_up + r.bytes_down,
              r.agg_bytes + r.ciphertext_bits / 8 + 2 * m * kEnvelopeHeaderBytes);
    EXPECT_GT(r.server_storage, 0u);
    EXPECT_GT(r.user_storage, 0u);
  }
}

TEST(Experiment, ReportIsDeterministic) {
  const Dataset data = Line(60, 55);
  std::ostringstream a, b, c;
  WriteReport(a, RunExperiment(LineConfig(3), data), false);
  WriteReport(b, RunExperiment(LineConfig(3), data), false);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().find("seconds"), std::string::npos);
  WriteReport(c, RunExperiment(LineConfig(3), data), true);
  EXPECT_NE(c.str().find("seconds"), std::string::npos);

  std::istringstream lines(a.str());
  std::string line;
  int rounds = 0;
  nlohmann::json last;
  while (std::getline(lines, line)) {
    last = nlohmann::json::parse(line);
    if (last["type"] == "round") ++rounds;
  }
  EXPECT_EQ(rounds, 3);
  EXPECT_EQ(last["type"], "summary");
  EXPECT_EQ(last["status"], "ok");
  EXPECT_EQ(last["metric"], "rmse");
}

TEST(Experiment, AbortPropagatesIntoReport) {
  ExperimentConfig cfg = LineConfig(3);
  cfg.dropout_fraction = 0.3;  // one of M = 4, but t + rho = 4
  const ExperimentReport rep = RunExperiment(cfg, Line(60, 56));
  EXPECT_EQ(rep.result.abort, fedtrain::AbortReason::kBelowAggThreshold);
  std::ostringstream out;
  WriteReport(out, rep, false);
  EXPECT_NE(out.str().find("\"status\":\"abort\""), std::string::npos);
  EXPECT_NE(out.str().find("agg-below-t-plus-rho"), std::string::npos);
  std::ostringstream table;
  WriteSummaryTable(table, rep);
  EXPECT_NE(table.str().find("abort"), std::string::npos);
}

TEST(Experiment, RejectsBadInputs) {
  ExperimentConfig cfg = LineConfig(1);
  cfg.train.kind = ModelKind::kLogistic;
  EXPECT_THROW(RunExperiment(cfg, Line(60, 57)), Error);
  cfg = LineConfig(1);
  cfg.dropout_fraction = 1.0;
  EXPECT_THROW(RunExperiment(cfg, Line(60, 57)), Error);
  cfg = LineConfig(1);
  try {
    RunExperiment(cfg, Line(20, 57));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientData);
  }
}

TEST(Experiment, LogisticAccuracy) {
  Csprng rng(58, "blobs");
  Dataset d;
  d.names = {"a", "b", "y"};
  for (int i = 0; i < 60; ++i) {
    const double y = i % 2;
    d.x.push_back({testing::Real(rng, -1, 1) + 3 * y, testing::Real(rng, -1, 1)});
    d.y.push_back(y);
  }
  ExperimentConfig cfg = LineConfig(10);
  cfg.train.kind = ModelKind::kLogistic;
  cfg.train.eta = 1.0;
  const ExperimentReport rep = RunExperiment(cfg, d);
  ASSERT_TRUE(rep.result.ok());
  EXPECT_EQ(rep.metric, "accuracy");
  EXPECT_GE(rep.score, 90.0);
}

TEST(SavedModel, JsonRoundTrip) {
  SavedModel m;
  m.kind = ModelKind::kRidge;
  m.theta = {0.5, -1.25, 3};
  m.mu = {1, 2};
  m.sigma = {0.5, 4};
  m.rounds = 7;
  m.seed = 99;
  const SavedModel back = ModelFromJson(ModelToJson(m));
  EXPECT_EQ(back.kind, m.kind);
  EXPECT_EQ(back.theta, m.theta);
  EXPECT_EQ(back.mu, m.mu);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.rounds, 7u);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_THROW(ModelFromJson("{\"kind\": \"linear\"}"), Error);
  EXPECT_THROW(ModelFromJson("[1, 2"), Error);
  m.mu = {1};
  EXPECT_THROW(ModelFromJson(ModelToJson(m)), Error);
}

// Byte patterns a leaked feature would leave in a payload.
std::vector<Bytes> Needles(const std::vector<LocalDataset>& users,
                           const fedtrain::ScalingResult& s, const FpConfig& fp) {
  std::vector<Bytes> out;
  auto add = [&](double v) {
    Bytes raw(8);
    std::memcpy(raw.data(), &v, 8);
    out.push_back(raw);
    const Bytes enc = MpzToBytes(FpEncode(v, 1, fp).value, fp.k / 8);
    out.emplace_back(enc.end() - 8, enc.end());
  };
  for (const auto& u : users) {
    for (const auto& row : u.x) {
      for (double v : row) add(v);
      for (double v : fedtrain::ScaleRow(row, s)) add(v);
    }
  }
  return out;
}

size_t Leaks(const std::vector<Envelope>& transcript,
             const std::vector<Bytes>& needles) {
  size_t hits = 0;
  for (const auto& env : transcript) {
    const PayloadClass c = PayloadClassOf(env.phase);
    if (c == PayloadClass::kAead || c == PayloadClass::kHeCiphertext ||
        c == PayloadClass::kMasked) {
      continue;
    }
    for (const auto& n : needles) {
      if (std::search(env.payload.begin(), env.payload.end(), n.begin(),
                      n.end()) != env.payload.end()) {
        ++hits;
      }
    }
  }
  return hits;
}

TEST(BusScanner, NoFeatureBytesOutsideProtectedPayloads) {
  Csprng rng(59, "scan");
  std::vector<LocalDataset> users;
  for (int u = 0; u < 6; ++u) {
    users.push_back(testing::RandomDataset(rng, 3, 3, ModelKind::kLinear, 5.0));
  }
  fedtrain::TrainConfig cfg;
  cfg.rounds = 2;
  cfg.modulus_bits = 2048;
  cfg.epsilon = 3;
  cfg.dropout.per_round = 1;
  cfg.dropout.point = fedtrain::DropPoint::kAfterMaskedInput;
  SimBus bus;
  bus.SetRecording(true);
  const fedtrain::TrainResult r = fedtrain::Train(cfg, users, &bus);
  ASSERT_TRUE(r.ok()) << fedtrain::AbortReasonName(r.abort);
  const auto needles = Needles(users, r.scaling, cfg.fp);
  ASSERT_GT(bus.transcript().size(), 50u);
  EXPECT_EQ(Leaks(bus.transcript(), needles), 0u);

  // The scanner does notice a leak.
  std::vector<Envelope> planted = bus.transcript();
  Envelope leak{0, PhaseTag::kAggAliveSet, kServerId, 1, needles[5]};
  planted.push_back(leak);
  EXPECT_EQ(Leaks(planted, needles), 1u);
}

TEST(Bench, TableShapes) {
  const bench::Table he = bench::He(AheBackend::kJoyeLibert, 2048, 256, {10}, 1);
  ASSERT_EQ(he.rows.size(), 3u);
  EXPECT_EQ(he.header.size(), 3u);
  EXPECT_EQ(he.rows[0][1], "enc");
  EXPECT_EQ(he.rows[1][1], "dec");
  EXPECT_EQ(he.rows[2][1], "const-mul");
  std::ostringstream text, csv;
  bench::PrintTable(text, he);
  bench::PrintCsv(csv, he);
  EXPECT_NE(text.str().find("const-mul"), std::string::npos);
  const std::string rows = csv.str();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 4);
}

TEST(Bench, AggregationAtQuarterDropout) {
  const bench::Table t = bench::Agg({50}, 0.25, 4, 64, 2);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0], "50");
  EXPECT_EQ(t.rows[0][1], "17");
  EXPECT_EQ(t.rows[0][2], "12");
  EXPECT_TRUE(bench::AllMatch(t));
}

TEST(Bench, SlgCountersMatchFormulas) {
  for (ModelKind kind : {ModelKind::kLinear, ModelKind::kLogistic}) {
    const bench::Table t =
        bench::Slg(kind, {1, 5}, {1, 3}, AheBackend::kJoyeLibert, 2048, 256, 3);
    EXPECT_EQ(t.rows.size(), 4u);
    EXPECT_TRUE(bench::AllMatch(t)) << ModelKindName(kind);
  }
}

}  // namespace
}  // namespace fedreg
