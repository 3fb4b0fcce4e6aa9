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

#ifndef FEDREG_EXPERIMENT_H_
#define FEDREG_EXPERIMENT_H_

#include <optional>
#include <ostream>
#include <string>

#include "fedreg/dataset.h"
#include "fedreg/fedtrain.h"

namespace fedreg {

struct ExperimentConfig {
  fedtrain::TrainConfig train;
  unsigned users = 0;
  unsigned per_user = 0;
  double split = 0.7;
  uint64_t partition_seed = 1;
  // Scheduled dropouts per round as a fraction of the cohort.
  double dropout_fraction = 0.0;
  bool run_oracle = false;
};

struct ExperimentReport {
  fedtrain::TrainResult result;
  std::optional<fedtrain::TrainResult> oracle;
  std::string metric;  // "rmse" or "accuracy"
  double score = 0.0;
  std::optional<double> oracle_score;
  size_t train_rows = 0;
  size_t test_rows = 0;
  HeOpCounts user_ops;
  HeOpCounts server_ops;
  uint64_t bytes_up = 0;
  uint64_t bytes_down = 0;
  uint64_t agg_bytes = 0;
};

// Intercept and coefficients; features are scaled with the training
// statistics before use.
double PredictPlain(const fedtrain::TrainResult& r, std::span<const double> x,
                    ModelKind kind);
double Rmse(const fedtrain::TrainResult& r, const LocalDataset& test);
// Percentage of test rows classified correctly at threshold 0.5.
double Accuracy(const fedtrain::TrainResult& r, const LocalDataset& test);

ExperimentReport RunExperiment(const ExperimentConfig& cfg,
                               const Dataset& data, SimBus* bus = nullptr);

// One JSON object per round, then a summary object. Wall-clock fields are
// omitted when `timings` is false.
void WriteReport(std::ostream& out, const ExperimentReport& report,
                 bool timings = true);
void WriteSummaryTable(std::ostream& out, const ExperimentReport& report);

struct SavedModel {
  ModelKind kind = ModelKind::kLinear;
  Model theta;
  std::vector<double> mu;
  std::vector<double> sigma;
  unsigned tau = 16;
  unsigned k = 256;
  unsigned rounds = 0;
  uint64_t seed = 0;
};

std::string ModelToJson(const SavedModel& model);
SavedModel ModelFromJson(const std::string& text);
SavedModel ToSavedModel(const ExperimentConfig& cfg,
                        const fedtrain::TrainResult& r);

}  // namespace fedreg

#endif  // FEDREG_EXPERIMENT_H_
