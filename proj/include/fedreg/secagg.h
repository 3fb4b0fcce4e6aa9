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

#ifndef FEDREG_SECAGG_H_
#define FEDREG_SECAGG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedreg/bus.h"
#include "fedreg/crypto/primitives.h"
#include "fedreg/ring.h"

namespace fedreg::secagg {

enum class AggPhase : uint8_t {
  kAdvertise = 0,
  kShareKeys = 1,
  kMaskedInput = 2,
  kConsistency = 3,
  kUnmask = 4,
  kDone = 5,
};

const char* AggPhaseName(AggPhase phase);

// A user listed here stops sending from the given phase onward.
struct DropSchedule {
  std::map<uint32_t, AggPhase> drop_before;

  void Drop(uint32_t user, AggPhase phase) { drop_before[user] = phase; }
  bool Active(uint32_t user, AggPhase phase) const;
};

// Users from `participants` whose masked input reaches the server under
// `drops`, assuming enough users survive every phase.
std::vector<uint32_t> ExpectedSurvivors(std::span<const uint32_t> participants,
                                        const DropSchedule& drops);

// The alive set a run would report if every user follows `drops`, or
// nullopt when some phase would fall below t.
std::optional<std::vector<uint32_t>> PredictOutcome(
    std::span<const uint32_t> participants, const DropSchedule& drops,
    unsigned t);

enum class AggStatus {
  kOk,
  kBelowThreshold,
  kInconsistentAlive,
  kAuthenticationFailure,
};

const char* AggStatusName(AggStatus status);

enum class ShareKind : uint8_t { kSelfSeed = 0, kMaskKey = 1 };

struct AggResult {
  AggStatus status = AggStatus::kOk;
  AggPhase failed_phase = AggPhase::kDone;
  std::string reason;
  uint64_t round = 0;
  // U_1 .. U_5 in protocol order; alive is U_3.
  std::vector<uint32_t> advertised, shared, alive, acknowledged, unmasked;
  RingVector sum;
  // Share kinds the server decrypted, per owner.
  std::map<uint32_t, std::set<ShareKind>> server_share_kinds;

  bool ok() const { return status == AggStatus::kOk; }
};

// One-time key for round i: H^i(master).
crypto::Digest DeriveRoundKey(const crypto::Digest& master, uint64_t round);

// y = x + PRG(b) + sum_{v > self} PRG(s_{self,v}) - sum_{v < self} PRG(s_{v,self}).
RingVector MaskInput(const Ring& ring, std::span<const mpz_class> x,
                     uint32_t self, const crypto::Key128& self_seed,
                     const std::map<uint32_t, crypto::Key128>& pair_seeds);

// Double-masking aggregation between a server (id 0) and users over a
// SimBus. Key agreement happens once in Setup; every Run derives fresh
// one-time keys by advancing the hash chains.
class SecAggNetwork {
 public:
  SecAggNetwork(SimBus& bus, std::vector<uint32_t> users, unsigned ring_bits,
                uint64_t seed);
  ~SecAggNetwork();
  SecAggNetwork(const SecAggNetwork&) = delete;
  SecAggNetwork& operator=(const SecAggNetwork&) = delete;

  // Returns the users that completed key establishment, or nullopt when
  // fewer than t did.
  std::optional<std::vector<uint32_t>> Setup(
      unsigned t, const std::set<uint32_t>& absent = {});

  // One aggregation over `participants` with per-user vectors of equal
  // dimension.
  AggResult Run(std::span<const uint32_t> participants,
                const std::map<uint32_t, RingVector>& inputs, unsigned t,
                const DropSchedule& drops = {});

  uint64_t round() const;
  const Ring& ring() const;
  const std::vector<uint32_t>& users() const;
  // Pairwise channel master key as seen by user u for peer v.
  crypto::Digest ChannelMaster(uint32_t u, uint32_t v) const;
  size_t DistinctPairwiseKeys() const;
  bool MaskKeyRotated(uint32_t u) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Fresh network, setup and a single run.
AggResult RunDea(std::span<const uint32_t> users,
                 const std::map<uint32_t, RingVector>& inputs, unsigned t,
                 const DropSchedule& drops, unsigned ring_bits, uint64_t seed);

}  // namespace fedreg::secagg

#endif  // FEDREG_SECAGG_H_
