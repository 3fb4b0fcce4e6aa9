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

#ifndef FEDREG_BUS_H_
#define FEDREG_BUS_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fedreg/bytes.h"

namespace fedreg {

constexpr uint32_t kServerId = 0;

enum class PhaseTag : uint8_t {
  kSetupAdvertise = 1,
  kSetupDirectory = 2,
  kAggAdvertise = 10,
  kAggRoster = 11,
  kAggShareKeys = 12,
  kAggMaskedInput = 13,
  kAggAliveSet = 14,
  kAggAck = 15,
  kAggUnmask = 16,
  kAggResult = 17,
  kSlgModel = 20,
  kSlgMasked = 21,
  kSlgAssist = 22,
  kSlgShare = 23,
  kModelBroadcast = 24,
  kPredictInput = 30,
  kPredictMasked = 31,
  kPredictAssist = 32,
  kPredictOutput = 33,
};

const char* PhaseTagName(PhaseTag tag);

// What a payload is allowed to contain.
enum class PayloadClass {
  kPublicKey,
  kAead,
  kHeCiphertext,
  kMasked,
  kControl,
  kPublicAggregate,
};

PayloadClass PayloadClassOf(PhaseTag tag);

struct Envelope {
  uint64_t session = 0;
  PhaseTag phase = PhaseTag::kAggAdvertise;
  uint32_t sender = 0;
  uint32_t receiver = 0;
  Bytes payload;
};

constexpr size_t kEnvelopeHeaderBytes = 8 + 1 + 4 + 4 + 4;

Bytes EncodeEnvelope(const Envelope& env);
// Throws kMalformed.
Envelope DecodeEnvelope(std::span<const uint8_t> wire);

struct TrafficCounter {
  uint64_t messages = 0;
  uint64_t header_bytes = 0;
  uint64_t payload_bytes = 0;

  uint64_t total_bytes() const { return header_bytes + payload_bytes; }
  TrafficCounter& operator+=(const TrafficCounter& o);
};

// Synchronous star network. Users talk only to the server; user-to-user
// traffic is relayed with Forward. Every message travels as its wire
// encoding so that tamper hooks and counters see real bytes.
class SimBus {
 public:
  // Returning false discards the message.
  using Filter = std::function<bool(const Envelope&)>;
  using Tamper = std::function<void(Envelope&, Bytes& wire)>;

  void Send(const Envelope& env);
  void Forward(const Envelope& env);
  // Pending messages for `node` in `phase`, ordered by sender then arrival.
  std::vector<Envelope> Drain(uint32_t node, PhaseTag phase);
  // Discards everything queued for `node`.
  void Purge(uint32_t node);

  void SetFilter(Filter f) { filter_ = std::move(f); }
  void SetTamper(Tamper t) { tamper_ = std::move(t); }
  void SetRecording(bool on) { recording_ = on; }
  const std::vector<Envelope>& transcript() const { return transcript_; }
  void ClearTranscript() { transcript_.clear(); }

  // Counters per directed edge (from, to).
  const std::map<std::pair<uint32_t, uint32_t>, TrafficCounter>& edges() const {
    return edges_;
  }
  const std::map<PhaseTag, TrafficCounter>& phases() const { return phases_; }
  TrafficCounter SentBy(uint32_t node) const;
  TrafficCounter ReceivedBy(uint32_t node) const;
  TrafficCounter Total() const;
  // Largest number of queued inbound bytes seen per node.
  const std::map<uint32_t, uint64_t>& storage_high_water() const {
    return high_water_;
  }
  void ResetCounters();

 private:
  void Deliver(uint32_t from, uint32_t to, const Envelope& env);

  struct Pending {
    uint64_t order;
    Bytes wire;
  };
  std::map<uint32_t, std::deque<Pending>> inbox_;
  std::map<uint32_t, uint64_t> queued_bytes_;
  std::map<uint32_t, uint64_t> high_water_;
  std::map<std::pair<uint32_t, uint32_t>, TrafficCounter> edges_;
  std::map<PhaseTag, TrafficCounter> phases_;
  std::vector<Envelope> transcript_;
  Filter filter_;
  Tamper tamper_;
  bool recording_ = false;
  uint64_t next_order_ = 0;
};

}  // namespace fedreg

#endif  // FEDREG_BUS_H_
