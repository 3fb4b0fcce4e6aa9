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

#include "fedreg/experiment.h"

#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>

#include "fedreg/error.h"
#include "fedreg/slg.h"

namespace fedreg {

namespace {

using nlohmann::json;

json Ops(const HeOpCounts& c) {
  return json{{"ct_mul", c.ct_mul},
              {"const_mul", c.const_mul},
              {"enc", c.enc},
              {"dec", c.dec}};
}

json RoundJson(const fedtrain::RoundReport& r, bool timings) {
  json j{{"type", "round"},
         {"round", r.round},
         {"cohort", r.cohort},
         {"completed", r.completed},
         {"survivors", r.survivors},
         {"d_a", r.d_a},
         {"gradient_norm", r.gradient_norm},
         {"user_ops", Ops(r.user_ops)},
         {"server_ops", Ops(r.server_ops)},
         {"slg_bits", r.ciphertext_bits},
         {"bytes_up", r.bytes_up},
         {"bytes_down", r.bytes_down},
         {"agg_bytes", r.agg_bytes},
         {"server_storage", r.server_storage},
         {"user_storage", r.user_storage}};
  if (timings) {
    j["seconds"] = {{"slg", r.seconds_slg},
                    {"agg", r.seconds_agg},
                    {"update", r.seconds_update}};
  }
  return j;
}

}  // namespace

double PredictPlain(const fedtrain::TrainResult& r, std::span<const double> x,
                    ModelKind kind) {
  const std::vector<double> s = fedtrain::ScaleRow(x, r.scaling);
  double z = r.model.at(0);
  for (size_t j = 0; j < s.size(); ++j) z += r.model.at(j + 1) * s[j];
  return kind == ModelKind::kLogistic ? slg::Sigmoid(z) : z;
}

double Rmse(const fedtrain::TrainResult& r, const LocalDataset& test) {
  if (test.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty test set");
  double sum = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    const double e = PredictPlain(r, test.x[i], ModelKind::kLinear) - test.y[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(test.size()));
}

double Accuracy(const fedtrain::TrainResult& r, const LocalDataset& test) {
  if (test.size() == 0) throw Error(ErrorCode::kEmptyDataset, "empty test set");
  size_t hit = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    const double p = PredictPlain(r, test.x[i], ModelKind::kLogistic);
    if ((p >= 0.5) == (test.y[i] >= 0.5)) ++hit;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(test.size());
}

ExperimentReport RunExperiment(const ExperimentConfig& cfg,
                               const Dataset& data, SimBus* bus) {
  if (cfg.train.kind == ModelKind::kLogistic) {
    for (double y : data.y) {
      if (y != 0.0 && y != 1.0) {
        throw Error(ErrorCode::kConfig, "logistic labels must be 0 or 1");
      }
    }
  }
  Partition part = PartitionDataset(data, cfg.users, cfg.per_user, cfg.split,
                                    cfg.partition_seed);
  fedtrain::TrainConfig tc = cfg.train;
  if (cfg.dropout_fraction > 0) {
    if (cfg.dropout_fraction >= 1) {
      throw Error(ErrorCode::kConfig, "dropout fraction must be below 1");
    }
    const auto p = fedtrain::Resolve(tc, cfg.users, cfg.per_user);
    tc.dropout.per_round = static_cast<unsigned>(
        std::floor(cfg.dropout_fraction * p.cohort));
  }
  ExperimentReport rep;
  rep.train_rows = size_t{cfg.users} * cfg.per_user;
  rep.test_rows = part.test.size();
  rep.result = fedtrain::Train(tc, part.users, bus);
  const bool linear = tc.kind != ModelKind::kLogistic;
  rep.metric = linear ? "rmse" : "accuracy";
  auto score = [&](const fedtrain::TrainResult& r) {
    return linear ? Rmse(r, part.test) : Accuracy(r, part.test);
  };
  if (rep.result.ok()) rep.score = score(rep.result);
  if (cfg.run_oracle) {
    rep.oracle = fedtrain::PlaintextOracle(tc, part.users);
    if (rep.oracle->ok()) rep.oracle_score = score(*rep.oracle);
  }
  for (const auto& r : rep.result.rounds) {
    rep.user_ops += r.user_ops;
    rep.server_ops += r.server_ops;
    rep.bytes_up += r.bytes_up;
    rep.bytes_down += r.bytes_down;
    rep.agg_bytes += r.agg_bytes;
  }
  return rep;
}

void WriteReport(std::ostream& out, const ExperimentReport& report,
                 bool timings) {
  for (const auto& r : report.result.rounds) {
    out << RoundJson(r, timings).dump() << '\n';
  }
  const auto& res = report.result;
  json s{{"type", "summary"},
         {"status", res.ok() ? "ok" : "abort"},
         {"abort", fedtrain::AbortReasonName(res.abort)},
         {"abort_detail", res.abort_detail},
         {"rounds", res.rounds.size()},
         {"t", res.params.t},
         {"cohort", res.params.cohort},
         {"rho", res.params.rho},
         {"model", res.model},
         {"metric", report.metric},
         {"score", report.score},
         {"train_rows", report.train_rows},
         {"test_rows", report.test_rows},
         {"sigmoid_fit_error", res.fit_error},
         {"user_ops", Ops(report.user_ops)},
         {"server_ops", Ops(report.server_ops)},
         {"bytes_up", report.bytes_up},
         {"bytes_down", report.bytes_down},
         {"agg_bytes", report.agg_bytes}};
  if (report.oracle_score) s["oracle_score"] = *report.oracle_score;
  out << s.dump() << '\n';
}

void WriteSummaryTable(std::ostream& out, const ExperimentReport& report) {
  const auto& res = report.result;
  out << std::left;
  auto row = [&](const std::string& k, const auto& v) {
    out << "  " << std::setw(18) << k << v << '\n';
  };
  row("status", res.ok() ? std::string("ok")
                         : std::string("abort (") +
                               fedtrain::AbortReasonName(res.abort) + ")");
  row("rounds", res.rounds.size());
  row("t / M / rho", std::to_string(res.params.t) + " / " +
                         std::to_string(res.params.cohort) + " / " +
                         std::to_string(res.params.rho));
  row(report.metric, report.score);
  if (report.oracle_score) row("oracle " + report.metric, *report.oracle_score);
  row("user ct_mul", report.user_ops.ct_mul);
  row("user const_mul", report.user_ops.const_mul);
  row("user enc", report.user_ops.enc);
  row("server dec", report.server_ops.dec);
  row("bytes up", report.bytes_up);
  row("bytes down", report.bytes_down);
}

std::string ModelToJson(const SavedModel& m) {
  return json{{"kind", ModelKindName(m.kind)},
              {"n", m.theta.empty() ? 0 : m.theta.size() - 1},
              {"theta", m.theta},
              {"mu", m.mu},
              {"sigma", m.sigma},
              {"tau", m.tau},
              {"k", m.k},
              {"rounds", m.rounds},
              {"seed", m.seed}}
      .dump(2);
}

SavedModel ModelFromJson(const std::string& text) {
  SavedModel m;
  try {
    const json j = json::parse(text);
    m.kind = ParseModelKind(j.at("kind").get<std::string>());
    m.theta = j.at("theta").get<std::vector<double>>();
    m.mu = j.at("mu").get<std::vector<double>>();
    m.sigma = j.at("sigma").get<std::vector<double>>();
    m.tau = j.at("tau").get<unsigned>();
    m.k = j.at("k").get<unsigned>();
    m.rounds = j.value("rounds", 0u);
    m.seed = j.value("seed", uint64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model file: ") + e.what());
  }
  if (m.theta.empty() || m.mu.size() + 1 != m.theta.size() ||
      m.sigma.size() != m.mu.size()) {
    throw Error(ErrorCode::kParse, "model file: inconsistent dimensions");
  }
  return m;
}

SavedModel ToSavedModel(const ExperimentConfig& cfg,
                        const fedtrain::TrainResult& r) {
  SavedModel m;
  m.kind = cfg.train.kind;
  m.theta = r.model;
  m.mu = r.scaling.mu;
  m.sigma = r.scaling.sigma;
  m.tau = cfg.train.fp.tau;
  m.k = cfg.train.fp.k;
  m.rounds = static_cast<unsigned>(r.rounds.size());
  m.seed = cfg.train.seed;
  return m;
}

}  // namespace fedreg
