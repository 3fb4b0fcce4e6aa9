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

#include "fedreg/bus.h"

#include <algorithm>
#include <string>

#include "fedreg/error.h"

namespace fedreg {

const char* PhaseTagName(PhaseTag tag) {
  switch (tag) {
    case PhaseTag::kSetupAdvertise: return "setup-advertise";
    case PhaseTag::kSetupDirectory: return "setup-directory";
    case PhaseTag::kAggAdvertise: return "agg-advertise";
    case PhaseTag::kAggRoster: return "agg-roster";
    case PhaseTag::kAggShareKeys: return "agg-share-keys";
    case PhaseTag::kAggMaskedInput: return "agg-masked-input";
    case PhaseTag::kAggAliveSet: return "agg-alive-set";
    case PhaseTag::kAggAck: return "agg-ack";
    case PhaseTag::kAggUnmask: return "agg-unmask";
    case PhaseTag::kAggResult: return "agg-result";
    case PhaseTag::kSlgModel: return "slg-model";
    case PhaseTag::kSlgMasked: return "slg-masked";
    case PhaseTag::kSlgAssist: return "slg-assist";
    case PhaseTag::kSlgShare: return "slg-share";
    case PhaseTag::kModelBroadcast: return "model-broadcast";
    case PhaseTag::kPredictInput: return "predict-input";
    case PhaseTag::kPredictMasked: return "predict-masked";
    case PhaseTag::kPredictAssist: return "predict-assist";
    case PhaseTag::kPredictOutput: return "predict-output";
  }
  return "unknown";
}

PayloadClass PayloadClassOf(PhaseTag tag) {
  switch (tag) {
    case PhaseTag::kSetupAdvertise:
    case PhaseTag::kSetupDirectory:
      return PayloadClass::kPublicKey;
    case PhaseTag::kAggAdvertise:
    case PhaseTag::kAggRoster:
      return PayloadClass::kPublicKey;
    case PhaseTag::kAggShareKeys:
    case PhaseTag::kAggUnmask:
      return PayloadClass::kAead;
    case PhaseTag::kAggMaskedInput:
      return PayloadClass::kMasked;
    case PhaseTag::kAggAliveSet:
    case PhaseTag::kAggAck:
      return PayloadClass::kControl;
    case PhaseTag::kAggResult:
    case PhaseTag::kModelBroadcast:
      return PayloadClass::kPublicAggregate;
    case PhaseTag::kSlgModel:
    case PhaseTag::kSlgMasked:
    case PhaseTag::kSlgAssist:
    case PhaseTag::kSlgShare:
    case PhaseTag::kPredictInput:
    case PhaseTag::kPredictMasked:
    case PhaseTag::kPredictAssist:
    case PhaseTag::kPredictOutput:
      return PayloadClass::kHeCiphertext;
  }
  return PayloadClass::kControl;
}

Bytes EncodeEnvelope(const Envelope& env) {
  ByteWriter w;
  w.PutU64(env.session);
  w.PutU8(static_cast<uint8_t>(env.phase));
  w.PutU32(env.sender);
  w.PutU32(env.receiver);
  w.PutBlob(env.payload);
  return std::move(w).bytes();
}

Envelope DecodeEnvelope(std::span<const uint8_t> wire) {
  ByteReader r(wire);
  Envelope env;
  env.session = r.GetU64();
  env.phase = static_cast<PhaseTag>(r.GetU8());
  env.sender = r.GetU32();
  env.receiver = r.GetU32();
  env.payload = r.GetBlob();
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing envelope bytes");
  return env;
}

TrafficCounter& TrafficCounter::operator+=(const TrafficCounter& o) {
  messages += o.messages;
  header_bytes += o.header_bytes;
  payload_bytes += o.payload_bytes;
  return *this;
}

void SimBus::Deliver(uint32_t from, uint32_t to, const Envelope& env) {
  if (filter_ && !filter_(env)) return;
  Envelope copy = env;
  Bytes wire = EncodeEnvelope(copy);
  if (tamper_) tamper_(copy, wire);
  TrafficCounter c{1, kEnvelopeHeaderBytes, env.payload.size()};
  edges_[{from, to}] += c;
  phases_[env.phase] += c;
  if (recording_) transcript_.push_back(env);
  queued_bytes_[to] += wire.size();
  high_water_[to] = std::max(high_water_[to], queued_bytes_[to]);
  inbox_[to].push_back(Pending{next_order_++, std::move(wire)});
}

void SimBus::Send(const Envelope& env) {
  if (env.sender == kServerId) {
    Deliver(kServerId, env.receiver, env);
  } else {
    Deliver(env.sender, kServerId, env);
  }
}

void SimBus::Forward(const Envelope& env) {
  Deliver(kServerId, env.receiver, env);
}

std::vector<Envelope> SimBus::Drain(uint32_t node, PhaseTag phase) {
  auto& q = inbox_[node];
  std::vector<std::pair<uint64_t, Envelope>> picked;
  std::deque<Pending> rest;
  for (auto& p : q) {
    Envelope env = DecodeEnvelope(p.wire);
    if (env.phase == phase) {
      queued_bytes_[node] -= p.wire.size();
      picked.emplace_back(p.order, std::move(env));
    } else {
      rest.push_back(std::move(p));
    }
  }
  q = std::move(rest);
  std::stable_sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    return a.second.sender != b.second.sender ? a.second.sender < b.second.sender
                                              : a.first < b.first;
  });
  std::vector<Envelope> out;
  out.reserve(picked.size());
  for (auto& p : picked) out.push_back(std::move(p.second));
  return out;
}

void SimBus::Purge(uint32_t node) {
  inbox_.erase(node);
  queued_bytes_[node] = 0;
}

TrafficCounter SimBus::SentBy(uint32_t node) const {
  TrafficCounter t;
  for (const auto& [edge, c] : edges_) {
    if (edge.first == node) t += c;
  }
  return t;
}

TrafficCounter SimBus::ReceivedBy(uint32_t node) const {
  TrafficCounter t;
  for (const auto& [edge, c] : edges_) {
    if (edge.second == node) t += c;
  }
  return t;
}

TrafficCounter SimBus::Total() const {
  TrafficCounter t;
  for (const auto& [edge, c] : edges_) t += c;
  return t;
}

void SimBus::ResetCounters() {
  edges_.clear();
  phases_.clear();
  high_water_.clear();
}

}  // namespace fedreg
