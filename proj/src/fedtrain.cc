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

#include "fedreg/fedtrain.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"
#include "fedreg/slg.h"

namespace fedreg::fedtrain {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point from) {
  return std::chrono::duration<double>(Clock::now() - from).count();
}

unsigned CeilDiv(unsigned a, unsigned b) { return (a + b - 1) / b; }

bool Contains(const std::vector<uint32_t>& sorted, uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

const char* DropPointName(DropPoint point) {
  switch (point) {
    case DropPoint::kBeforeSlg: return "before-slg";
    case DropPoint::kAfterSlg: return "after-slg";
    case DropPoint::kAfterShareKeys: return "after-share-keys";
    case DropPoint::kAfterMaskedInput: return "after-masked-input";
  }
  return "unknown";
}

DropPoint ParseDropPoint(std::string_view name) {
  if (name == "before-slg") return DropPoint::kBeforeSlg;
  if (name == "after-slg") return DropPoint::kAfterSlg;
  if (name == "after-share-keys") return DropPoint::kAfterShareKeys;
  if (name == "after-masked-input") return DropPoint::kAfterMaskedInput;
  throw Error(ErrorCode::kConfig, "unknown drop point '" + std::string(name) + "'");
}

const char* AbortReasonName(AbortReason reason) {
  switch (reason) {
    case AbortReason::kNone: return "none";
    case AbortReason::kSetup: return "setup-below-threshold";
    case AbortReason::kScaling: return "scaling-below-2t";
    case AbortReason::kZeroVariance: return "zero-variance-feature";
    case AbortReason::kBelowCohort: return "alive-below-M";
    case AbortReason::kBelowSlgThreshold: return "slg-below-t-plus-rho";
    case AbortReason::kAggregationFailed: return "aggregation-failed";
    case AbortReason::kBelowAggThreshold: return "agg-below-t-plus-rho";
  }
  return "unknown";
}

std::vector<uint32_t> SampleCohort(std::span<const uint32_t> alive, unsigned m,
                                   Csprng& rng) {
  std::vector<uint32_t> pool(alive.begin(), alive.end());
  std::sort(pool.begin(), pool.end());
  if (m > pool.size()) {
    throw Error(ErrorCode::kParameter, "cohort larger than the alive set");
  }
  for (unsigned i = 0; i < m; ++i) {
    const uint64_t j = i + rng.Below(uint64_t{pool.size() - i});
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<RoundDrop> DropoutPlan::DropsFor(unsigned round,
                                             std::span<const uint32_t> cohort,
                                             uint64_t seed) const {
  std::vector<RoundDrop> out;
  auto it = fixed.find(round);
  if (it != fixed.end()) {
    for (const auto& d : it->second) {
      if (std::find(cohort.begin(), cohort.end(), d.user) != cohort.end()) {
        out.push_back(d);
      }
    }
    return out;
  }
  if (per_round == 0) return out;
  Csprng rng(seed, "dropout/round/" + std::to_string(round));
  const unsigned count =
      std::min<unsigned>(per_round, static_cast<unsigned>(cohort.size()));
  for (uint32_t u : SampleCohort(cohort, count, rng)) {
    out.push_back(RoundDrop{u, point});
  }
  return out;
}

unsigned DropoutPlan::MaxPerRound() const {
  size_t most = per_round;
  for (const auto& [round, drops] : fixed) most = std::max(most, drops.size());
  return static_cast<unsigned>(most);
}

RoundSurvivors SurvivorsOf(std::span<const uint32_t> cohort,
                           std::span<const RoundDrop> drops) {
  RoundSurvivors out;
  for (uint32_t u : cohort) {
    bool before = false;
    bool agg_gone = false;
    for (const auto& d : drops) {
      if (d.user != u) continue;
      if (d.point == DropPoint::kBeforeSlg) before = true;
      if (d.point != DropPoint::kAfterMaskedInput) agg_gone = true;
    }
    if (before) continue;
    out.slg.push_back(u);
    if (!agg_gone) out.agg.push_back(u);
  }
  std::sort(out.slg.begin(), out.slg.end());
  std::sort(out.agg.begin(), out.agg.end());
  return out;
}

secagg::DropSchedule AggScheduleOf(std::span<const RoundDrop> drops) {
  secagg::DropSchedule s;
  for (const auto& d : drops) {
    switch (d.point) {
      case DropPoint::kBeforeSlg:
      case DropPoint::kAfterSlg:
        s.Drop(d.user, secagg::AggPhase::kAdvertise);
        break;
      case DropPoint::kAfterShareKeys:
        s.Drop(d.user, secagg::AggPhase::kMaskedInput);
        break;
      case DropPoint::kAfterMaskedInput:
        s.Drop(d.user, secagg::AggPhase::kConsistency);
        break;
    }
  }
  return s;
}

ResolvedParams Resolve(const TrainConfig& cfg, unsigned m, unsigned ell) {
  if (m == 0 || ell == 0) {
    throw Error(ErrorCode::kConfig, "need at least one user and one point");
  }
  ResolvedParams p;
  p.m = m;
  p.ell = ell;
  p.t = cfg.threshold ? cfg.threshold : CeilDiv(m, 3);
  p.cohort = cfg.cohort ? cfg.cohort : 2 * p.t;
  p.epsilon = cfg.epsilon ? cfg.epsilon : p.t * ell;
  p.rho = CeilDiv(p.epsilon, ell);
  if (p.t > m) throw Error(ErrorCode::kConfig, "threshold exceeds user count");
  if (p.cohort < 2 * p.t) {
    throw Error(ErrorCode::kConfig,
                "cohort size M=" + std::to_string(p.cohort) +
                    " must be at least 2t=" + std::to_string(2 * p.t));
  }
  if (p.cohort > m) {
    throw Error(ErrorCode::kConfig, "cohort size exceeds user count");
  }
  const unsigned delta = cfg.dropout.MaxPerRound();
  if (delta + p.rho + cfg.coalition > p.cohort) {
    throw Error(ErrorCode::kConfig,
                "dropouts per round " + std::to_string(delta) +
                    " exceed M - rho - c = " + std::to_string(p.cohort) +
                    " - " + std::to_string(p.rho) + " - " +
                    std::to_string(cfg.coalition));
  }
  if (!(cfg.eta > 0) || cfg.lambda < 0) {
    throw Error(ErrorCode::kConfig, "eta must be positive and lambda >= 0");
  }
  FpCheckDepth(cfg.fp, cfg.kind == ModelKind::kLogistic ? 8 : 3, 60);
  return p;
}

namespace {

size_t TotalPoints(const std::vector<LocalDataset>& users,
                   std::span<const uint32_t> ids) {
  size_t d = 0;
  for (uint32_t u : ids) d += users.at(u - 1).size();
  return d;
}

void FinishScaling(ScalingResult& s, std::span<const double> sums, size_t n) {
  s.mu.assign(n, 0.0);
  s.sigma.assign(n, 0.0);
  if (s.d < 2) {
    s.abort = AbortReason::kZeroVariance;
    return;
  }
  const double d = static_cast<double>(s.d);
  for (size_t j = 0; j < n; ++j) {
    s.mu[j] = sums[j] / d;
    const double var = (sums[n + j] - d * s.mu[j] * s.mu[j]) / (d - 1.0);
    s.sigma[j] = var > 0 ? std::sqrt(var) : 0.0;
    if (!(s.sigma[j] > 1e-12 * std::max(1.0, std::fabs(s.mu[j])))) {
      s.abort = AbortReason::kZeroVariance;
    }
  }
}

}  // namespace

ScalingResult SecureScaling(secagg::SecAggNetwork& net,
                            const std::vector<LocalDataset>& users,
                            std::span<const uint32_t> participants, unsigned t,
                            const secagg::DropSchedule& drops,
                            const FpConfig& fp) {
  ScalingResult s;
  if (participants.empty()) {
    s.abort = AbortReason::kScaling;
    return s;
  }
  const size_t n = users.at(participants[0] - 1).features();
  std::map<uint32_t, RingVector> inputs;
  for (uint32_t u : participants) {
    const LocalDataset& data = users.at(u - 1);
    std::vector<double> sums(2 * n, 0.0);
    for (const auto& row : data.x) {
      if (row.size() != n) throw Error(ErrorCode::kDimension, "ragged features");
      for (size_t j = 0; j < n; ++j) {
        sums[j] += row[j];
        sums[n + j] += row[j] * row[j];
      }
    }
    inputs[u] = FpEncodeValues(sums, 2, fp);
  }
  secagg::AggResult res = net.Run(participants, inputs, 2 * t, drops);
  if (!res.ok() || res.alive.size() < 2 * t) {
    s.abort = AbortReason::kScaling;
    s.alive = res.alive;
    return s;
  }
  s.alive = res.alive;
  s.d = TotalPoints(users, s.alive);
  std::vector<double> sums(2 * n);
  for (size_t j = 0; j < 2 * n; ++j) sums[j] = FpDecode(res.sum[j], 2, fp);
  FinishScaling(s, sums, n);
  return s;
}

ScalingResult PlainScaling(const std::vector<LocalDataset>& users,
                           std::span<const uint32_t> alive) {
  ScalingResult s;
  s.alive.assign(alive.begin(), alive.end());
  std::sort(s.alive.begin(), s.alive.end());
  if (s.alive.empty()) {
    s.abort = AbortReason::kScaling;
    return s;
  }
  const size_t n = users.at(s.alive[0] - 1).features();
  std::vector<double> sums(2 * n, 0.0);
  for (uint32_t u : s.alive) {
    for (const auto& row : users.at(u - 1).x) {
      for (size_t j = 0; j < n; ++j) {
        sums[j] += row[j];
        sums[n + j] += row[j] * row[j];
      }
    }
  }
  s.d = TotalPoints(users, s.alive);
  FinishScaling(s, sums, n);
  return s;
}

std::vector<double> ScaleRow(std::span<const double> x, const ScalingResult& s) {
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - s.mu[j]) / s.sigma[j];
  return out;
}

void ApplyScaling(std::vector<LocalDataset>& users, const ScalingResult& s) {
  for (auto& data : users) {
    for (auto& row : data.x) row = ScaleRow(row, s);
  }
}

Model ModelUpdate(const Model& theta, std::span<const double> omega,
                  double d_a, double eta, ModelKind kind, double lambda) {
  if (theta.size() != omega.size()) {
    throw Error(ErrorCode::kDimension, "gradient and model sizes differ");
  }
  if (!(d_a >= 1)) throw Error(ErrorCode::kParameter, "d_a must be >= 1");
  Model out(theta.size());
  for (size_t j = 0; j < theta.size(); ++j) {
    if (kind == ModelKind::kRidge) {
      out[j] = (1.0 - 2.0 * lambda * eta) * theta[j] - 2.0 * eta * omega[j];
    } else {
      out[j] = theta[j] - eta / d_a * omega[j];
    }
  }
  return out;
}

std::optional<std::vector<double>> LeakageDemo(std::span<const double> omega) {
  if (omega.empty() || omega[0] == 0.0) return std::nullopt;
  std::vector<double> x(omega.size() - 1);
  for (size_t j = 1; j < omega.size(); ++j) x[j - 1] = omega[j] / omega[0];
  return x;
}

namespace {

double Norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<uint32_t> AllUsers(unsigned m, const std::set<uint32_t>& absent) {
  std::vector<uint32_t> out;
  for (uint32_t u = 1; u <= m; ++u) {
    if (!absent.count(u)) out.push_back(u);
  }
  return out;
}

unsigned CommonSize(const std::vector<LocalDataset>& users) {
  if (users.empty()) throw Error(ErrorCode::kConfig, "no users");
  const size_t ell = users.front().size();
  for (const auto& u : users) {
    if (u.size() == 0) throw Error(ErrorCode::kEmptyDataset, "user without data");
    if (u.features() != users.front().features()) {
      throw Error(ErrorCode::kDimension, "users disagree on feature count");
    }
  }
  return static_cast<unsigned>(ell);
}

TrainResult Aborted(TrainResult r, AbortReason why, std::string detail) {
  r.abort = why;
  r.abort_detail = std::move(detail);
  return r;
}

}  // namespace

TrainResult Train(const TrainConfig& cfg, std::vector<LocalDataset> users,
                  SimBus* bus_in) {
  const unsigned m = static_cast<unsigned>(users.size());
  TrainResult result;
  result.params = Resolve(cfg, m, CommonSize(users));
  const ResolvedParams& p = result.params;
  const size_t n = users.front().features();
  result.model.assign(n + 1, 0.0);

  std::unique_ptr<SimBus> own_bus;
  if (bus_in == nullptr) own_bus = std::make_unique<SimBus>();
  SimBus& bus = bus_in ? *bus_in : *own_bus;
  const Ring ring = cfg.fp.ring();

  // Key establishment.
  Csprng keygen_rng(cfg.seed, "server/ahe-keygen");
  const AheKeyPair keys =
      AheKeygen(cfg.backend, cfg.modulus_bits, cfg.fp.k, keygen_rng);
  std::vector<uint32_t> all;
  for (uint32_t u = 1; u <= m; ++u) all.push_back(u);
  secagg::SecAggNetwork net(bus, all, cfg.fp.k, cfg.seed);
  auto u0 = net.Setup(p.t, cfg.setup_absent);
  if (!u0) return Aborted(std::move(result), AbortReason::kSetup, "key setup");

  // Secure scaling.
  result.scaling =
      SecureScaling(net, users, *u0, p.t, cfg.scaling_drops, cfg.fp);
  if (result.scaling.abort != AbortReason::kNone) {
    return Aborted(std::move(result), result.scaling.abort, "scaling");
  }
  ApplyScaling(users, result.scaling);
  const std::vector<uint32_t> alive = result.scaling.alive;

  const slg::SigmoidCubic sig =
      slg::FitSigmoidCubic(cfg.sigmoid_bound, cfg.sigmoid_grid);
  result.fit_error = sig.max_fit_error;
  const RingVector q = sig.Encoded(cfg.fp);

  std::map<uint32_t, slg::EncodedDataset> encoded;
  std::map<uint32_t, Csprng> user_rng;
  for (uint32_t u : alive) {
    encoded[u] = slg::EncodeDataset(users[u - 1], cfg.kind, cfg.fp);
    user_rng.emplace(u, Csprng(cfg.seed, "user/" + std::to_string(u) + "/slg"));
  }
  Csprng cohort_rng(cfg.seed, "cohort");
  Csprng server_rng(cfg.seed, "server/he");

  for (unsigned j = 1; j <= cfg.rounds; ++j) {
    RoundReport rep;
    rep.round = j;
    bus.ResetCounters();
    if (alive.size() < p.cohort) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowCohort,
                     "round " + std::to_string(j));
    }
    rep.cohort = SampleCohort(alive, p.cohort, cohort_rng);
    const auto drops = cfg.dropout.DropsFor(j, rep.cohort, cfg.seed);
    const RoundSurvivors planned = SurvivorsOf(rep.cohort, drops);

    auto t_slg = Clock::now();
    HeEvaluator server_ev(*keys.pk, server_rng);
    const auto enc_model =
        server_ev.Encrypt(slg::EncodeModel(result.model, cfg.fp));
    std::map<uint32_t, std::vector<Ciphertext>> enc_s;
    std::map<uint32_t, RingVector> r_share;
    const uint64_t session = (uint64_t{j} << 32);
    for (uint32_t u : rep.cohort) {
      if (!Contains(planned.slg, u)) {
        bus.Send(Envelope{session | u, PhaseTag::kSlgModel, kServerId, u,
                          PackCiphertexts(*keys.pk, enc_model)});
        continue;
      }
      slg::SlgExchange ex = slg::RunSlgSession(
          bus, session | u, u, cfg.kind, keys, enc_model, encoded.at(u), q,
          ring, user_rng.at(u), server_rng);
      enc_s[u] = std::move(ex.shares.enc_server_share);
      r_share[u] = std::move(ex.shares.user_share);
      rep.user_ops += ex.user_ops;
      rep.server_ops += ex.server_ops;
      rep.ciphertext_bits += ex.ciphertext_bits;
    }
    for (uint32_t u : rep.cohort) bus.Purge(u);
    rep.completed = planned.slg;
    rep.seconds_slg = Seconds(t_slg);
    if (rep.completed.size() < p.t + p.rho) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowSlgThreshold,
                     "round " + std::to_string(j));
    }

    auto t_agg = Clock::now();
    secagg::AggResult agg =
        net.Run(rep.completed, r_share, p.t, AggScheduleOf(drops));
    rep.seconds_agg = Seconds(t_agg);
    if (!agg.ok()) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kAggregationFailed,
                     "round " + std::to_string(j) + ": " + agg.reason);
    }
    rep.survivors = agg.alive;
    if (rep.survivors.size() < p.t + p.rho) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowAggThreshold,
                     "round " + std::to_string(j));
    }

    auto t_update = Clock::now();
    RingVector omega(n + 1, 0);
    for (uint32_t u : rep.survivors) {
      const auto& cts = enc_s.at(u);
      for (size_t c = 0; c <= n; ++c) {
        omega[c] += server_ev.Decrypt(*keys.sk, cts[c]);
      }
      rep.share_sum_set.push_back(u);
    }
    for (size_t c = 0; c <= n; ++c) omega[c] = ring.Sub(omega[c], agg.sum[c]);
    rep.gradient = slg::DecodeGradient(omega, cfg.kind, cfg.fp);
    rep.gradient_norm = Norm(rep.gradient);
    rep.d_a = TotalPoints(users, rep.survivors);
    result.model = ModelUpdate(result.model, rep.gradient,
                               static_cast<double>(rep.d_a), cfg.eta, cfg.kind,
                               cfg.lambda);
    rep.server_ops += server_ev.counts();
    rep.seconds_update = Seconds(t_update);
    for (uint32_t u : all) rep.bytes_up += bus.SentBy(u).total_bytes();
    rep.bytes_down = bus.SentBy(kServerId).total_bytes();
    for (const auto& [tag, c] : bus.phases()) {
      if (PayloadClassOf(tag) != PayloadClass::kHeCiphertext) {
        rep.agg_bytes += c.total_bytes();
      }
    }
    for (const auto& [node, bytes] : bus.storage_high_water()) {
      if (node == kServerId) {
        rep.server_storage = bytes;
      } else {
        rep.user_storage = std::max(rep.user_storage, bytes);
      }
    }
    result.rounds.push_back(std::move(rep));
  }
  return result;
}

TrainResult PlaintextOracle(const TrainConfig& cfg,
                            std::vector<LocalDataset> users) {
  const unsigned m = static_cast<unsigned>(users.size());
  TrainResult result;
  result.params = Resolve(cfg, m, CommonSize(users));
  const ResolvedParams& p = result.params;
  const size_t n = users.front().features();
  result.model.assign(n + 1, 0.0);

  const std::vector<uint32_t> u0 = AllUsers(m, cfg.setup_absent);
  if (u0.size() < p.t) {
    return Aborted(std::move(result), AbortReason::kSetup, "key setup");
  }
  auto scaled = secagg::PredictOutcome(u0, cfg.scaling_drops, 2 * p.t);
  if (!scaled) {
    result.scaling.abort = AbortReason::kScaling;
    return Aborted(std::move(result), AbortReason::kScaling, "scaling");
  }
  result.scaling = PlainScaling(users, *scaled);
  if (result.scaling.abort != AbortReason::kNone) {
    return Aborted(std::move(result), result.scaling.abort, "scaling");
  }
  ApplyScaling(users, result.scaling);
  const std::vector<uint32_t> alive = result.scaling.alive;

  const slg::SigmoidCubic sig =
      slg::FitSigmoidCubic(cfg.sigmoid_bound, cfg.sigmoid_grid);
  result.fit_error = sig.max_fit_error;
  Csprng cohort_rng(cfg.seed, "cohort");

  for (unsigned j = 1; j <= cfg.rounds; ++j) {
    RoundReport rep;
    rep.round = j;
    if (alive.size() < p.cohort) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowCohort,
                     "round " + std::to_string(j));
    }
    rep.cohort = SampleCohort(alive, p.cohort, cohort_rng);
    const auto drops = cfg.dropout.DropsFor(j, rep.cohort, cfg.seed);
    const RoundSurvivors planned = SurvivorsOf(rep.cohort, drops);
    rep.completed = planned.slg;
    if (rep.completed.size() < p.t + p.rho) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowSlgThreshold,
                     "round " + std::to_string(j));
    }
    auto agg = secagg::PredictOutcome(rep.completed, AggScheduleOf(drops), p.t);
    if (!agg) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kAggregationFailed,
                     "round " + std::to_string(j));
    }
    rep.survivors = *agg;
    if (rep.survivors.size() < p.t + p.rho) {
      result.rounds.push_back(rep);
      return Aborted(std::move(result), AbortReason::kBelowAggThreshold,
                     "round " + std::to_string(j));
    }
    std::vector<double> omega(n + 1, 0.0);
    for (uint32_t u : rep.survivors) {
      const LocalDataset& data = users[u - 1];
      for (size_t i = 0; i < data.size(); ++i) {
        double z = result.model[0];
        for (size_t c = 0; c < n; ++c) z += result.model[c + 1] * data.x[i][c];
        double h = z;
        if (cfg.kind == ModelKind::kLogistic) {
          h = cfg.oracle_exact_sigmoid ? slg::Sigmoid(z) : sig.Eval(z);
        }
        const double e = h - data.y[i];
        omega[0] += e;
        for (size_t c = 0; c < n; ++c) omega[c + 1] += e * data.x[i][c];
      }
    }
    rep.share_sum_set = rep.survivors;
    rep.gradient = omega;
    rep.gradient_norm = Norm(omega);
    rep.d_a = TotalPoints(users, rep.survivors);
    result.model = ModelUpdate(result.model, omega,
                               static_cast<double>(rep.d_a), cfg.eta, cfg.kind,
                               cfg.lambda);
    result.rounds.push_back(std::move(rep));
  }
  return result;
}

}  // namespace fedreg::fedtrain
