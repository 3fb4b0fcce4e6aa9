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

#ifndef FEDREG_FEDTRAIN_H_
#define FEDREG_FEDTRAIN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedreg/ahe.h"
#include "fedreg/bus.h"
#include "fedreg/fixed_point.h"
#include "fedreg/secagg.h"
#include "fedreg/types.h"

namespace fedreg {

class Csprng;

namespace fedtrain {

// Where in a training round a cohort member disappears.
enum class DropPoint {
  kBeforeSlg,
  kAfterSlg,
  kAfterShareKeys,
  kAfterMaskedInput,
};

const char* DropPointName(DropPoint point);
DropPoint ParseDropPoint(std::string_view name);

struct RoundDrop {
  uint32_t user = 0;
  DropPoint point = DropPoint::kAfterSlg;
};

// Transient per-round dropouts. Rounds listed in `fixed` use those entries;
// every other round drops `per_round` cohort members drawn from a stream
// named after the round.
struct DropoutPlan {
  unsigned per_round = 0;
  DropPoint point = DropPoint::kAfterSlg;
  std::map<unsigned, std::vector<RoundDrop>> fixed;

  std::vector<RoundDrop> DropsFor(unsigned round,
                                  std::span<const uint32_t> cohort,
                                  uint64_t seed) const;
  unsigned MaxPerRound() const;
};

// Cohort members that return E(s) and those whose aggregation input lands.
struct RoundSurvivors {
  std::vector<uint32_t> slg;
  std::vector<uint32_t> agg;
};

RoundSurvivors SurvivorsOf(std::span<const uint32_t> cohort,
                           std::span<const RoundDrop> drops);
secagg::DropSchedule AggScheduleOf(std::span<const RoundDrop> drops);

// Uniform sample of M ids without replacement, returned sorted.
std::vector<uint32_t> SampleCohort(std::span<const uint32_t> alive, unsigned m,
                                   Csprng& rng);

struct TrainConfig {
  ModelKind kind = ModelKind::kLinear;
  unsigned rounds = 350;
  double eta = 0.1;
  double lambda = 0.0;
  unsigned threshold = 0;   // 0: ceil(m / 3)
  unsigned cohort = 0;      // 0: 2t
  unsigned epsilon = 0;     // 0: t * ell
  unsigned coalition = 0;
  FpConfig fp;
  unsigned modulus_bits = 3072;
  AheBackend backend = AheBackend::kJoyeLibert;
  uint64_t seed = 1;
  DropoutPlan dropout;
  secagg::DropSchedule scaling_drops;
  std::set<uint32_t> setup_absent;
  double sigmoid_bound = 8.0;
  size_t sigmoid_grid = 1000;
  // Oracle only: use the exact logistic function instead of the cubic.
  bool oracle_exact_sigmoid = false;
};

struct ResolvedParams {
  unsigned m = 0;
  unsigned ell = 0;
  unsigned t = 0;
  unsigned cohort = 0;
  unsigned epsilon = 0;
  unsigned rho = 0;
};

// Applies defaults and checks the parameter constraints. Throws kConfig.
ResolvedParams Resolve(const TrainConfig& cfg, unsigned m, unsigned ell);

enum class AbortReason {
  kNone,
  kSetup,
  kScaling,
  kZeroVariance,
  kBelowCohort,
  kBelowSlgThreshold,
  kAggregationFailed,
  kBelowAggThreshold,
};

const char* AbortReasonName(AbortReason reason);

struct ScalingResult {
  std::vector<double> mu;
  std::vector<double> sigma;
  std::vector<uint32_t> alive;
  size_t d = 0;
  AbortReason abort = AbortReason::kNone;
};

// One aggregation of (sum x, sum x^2) over `participants` with threshold
// 2t. users[u - 1] is the data of user u.
ScalingResult SecureScaling(secagg::SecAggNetwork& net,
                            const std::vector<LocalDataset>& users,
                            std::span<const uint32_t> participants, unsigned t,
                            const secagg::DropSchedule& drops,
                            const FpConfig& fp);
// Float reference over the given users.
ScalingResult PlainScaling(const std::vector<LocalDataset>& users,
                           std::span<const uint32_t> alive);
void ApplyScaling(std::vector<LocalDataset>& users, const ScalingResult& s);
std::vector<double> ScaleRow(std::span<const double> x, const ScalingResult& s);

Model ModelUpdate(const Model& theta, std::span<const double> omega,
                  double d_a, double eta, ModelKind kind, double lambda);

// x_j = omega_j / omega_0 for a single-point gradient; nullopt if omega_0 = 0.
std::optional<std::vector<double>> LeakageDemo(std::span<const double> omega);

struct RoundReport {
  unsigned round = 0;
  std::vector<uint32_t> cohort;
  std::vector<uint32_t> completed;
  std::vector<uint32_t> survivors;
  std::vector<uint32_t> share_sum_set;
  size_t d_a = 0;
  std::vector<double> gradient;
  double gradient_norm = 0.0;
  HeOpCounts user_ops;
  HeOpCounts server_ops;
  uint64_t ciphertext_bits = 0;
  uint64_t bytes_up = 0;
  uint64_t bytes_down = 0;
  uint64_t agg_bytes = 0;
  uint64_t server_storage = 0;
  uint64_t user_storage = 0;  // largest over users
  double seconds_slg = 0.0;
  double seconds_agg = 0.0;
  double seconds_update = 0.0;
};

struct TrainResult {
  Model model;
  ScalingResult scaling;
  std::vector<RoundReport> rounds;
  AbortReason abort = AbortReason::kNone;
  std::string abort_detail;
  ResolvedParams params;
  double fit_error = 0.0;

  bool ok() const { return abort == AbortReason::kNone; }
};

// Full protocol: key establishment, secure scaling, then `rounds` rounds.
// users[u - 1] belongs to user u. The bus is created internally when null.
TrainResult Train(const TrainConfig& cfg, std::vector<LocalDataset> users,
                  SimBus* bus = nullptr);

// Same cohorts, same dropouts, float arithmetic.
TrainResult PlaintextOracle(const TrainConfig& cfg,
                            std::vector<LocalDataset> users);

}  // namespace fedtrain
}  // namespace fedreg

#endif  // FEDREG_FEDTRAIN_H_
