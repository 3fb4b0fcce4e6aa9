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

#include "fedreg/bus.h"
#include "fedreg/error.h"

namespace fedreg {
namespace {

Envelope Msg(uint32_t from, uint32_t to, PhaseTag tag, Bytes payload) {
  return Envelope{1, tag, from, to, std::move(payload)};
}

TEST(Envelope, WireRoundTrip) {
  const Envelope e{42, PhaseTag::kAggUnmask, 3, 0, Bytes{1, 2, 3}};
  const Bytes wire = EncodeEnvelope(e);
  EXPECT_EQ(wire.size(), kEnvelopeHeaderBytes + 3);
  const Envelope back = DecodeEnvelope(wire);
  EXPECT_EQ(back.session, 42u);
  EXPECT_EQ(back.phase, PhaseTag::kAggUnmask);
  EXPECT_EQ(back.sender, 3u);
  EXPECT_EQ(back.receiver, 0u);
  EXPECT_EQ(back.payload, (Bytes{1, 2, 3}));
  Bytes longer = wire;
  longer.push_back(0);
  EXPECT_THROW(DecodeEnvelope(longer), Error);
  EXPECT_THROW(DecodeEnvelope(Bytes(wire.begin(), wire.end() - 1)), Error);
}

TEST(SimBus, DrainOrdersBySenderThenArrival) {
  SimBus bus;
  bus.Send(Msg(3, kServerId, PhaseTag::kAggAck, {1}));
  bus.Send(Msg(1, kServerId, PhaseTag::kAggAck, {2}));
  bus.Send(Msg(3, kServerId, PhaseTag::kAggAck, {3}));
  bus.Send(Msg(2, kServerId, PhaseTag::kAggMaskedInput, {4}));
  const auto got = bus.Drain(kServerId, PhaseTag::kAggAck);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].sender, 1u);
  EXPECT_EQ(got[1].payload, Bytes{1});
  EXPECT_EQ(got[2].payload, Bytes{3});
  EXPECT_TRUE(bus.Drain(kServerId, PhaseTag::kAggAck).empty());
  EXPECT_EQ(bus.Drain(kServerId, PhaseTag::kAggMaskedInput).size(), 1u);
}

TEST(SimBus, UsersOnlyTalkToTheServer) {
  SimBus bus;
  bus.Send(Msg(1, 2, PhaseTag::kAggShareKeys, {9}));
  EXPECT_TRUE(bus.Drain(2, PhaseTag::kAggShareKeys).empty());
  auto at_server = bus.Drain(kServerId, PhaseTag::kAggShareKeys);
  ASSERT_EQ(at_server.size(), 1u);
  bus.Forward(at_server[0]);
  EXPECT_EQ(bus.Drain(2, PhaseTag::kAggShareKeys).size(), 1u);
  EXPECT_EQ(bus.edges().at({1, kServerId}).messages, 1u);
  EXPECT_EQ(bus.edges().at({kServerId, 2}).messages, 1u);
}

TEST(SimBus, CountersAndStorage) {
  SimBus bus;
  bus.Send(Msg(1, kServerId, PhaseTag::kAggAck, Bytes(10)));
  bus.Send(Msg(2, kServerId, PhaseTag::kAggAck, Bytes(5)));
  bus.Send(Msg(kServerId, 1, PhaseTag::kAggAliveSet, Bytes(7)));
  EXPECT_EQ(bus.SentBy(1).payload_bytes, 10u);
  EXPECT_EQ(bus.SentBy(1).total_bytes(), 10u + kEnvelopeHeaderBytes);
  EXPECT_EQ(bus.ReceivedBy(kServerId).messages, 2u);
  EXPECT_EQ(bus.Total().payload_bytes, 22u);
  EXPECT_EQ(bus.phases().at(PhaseTag::kAggAck).payload_bytes, 15u);
  EXPECT_EQ(bus.storage_high_water().at(kServerId),
            15u + 2 * kEnvelopeHeaderBytes);
  bus.Drain(kServerId, PhaseTag::kAggAck);
  bus.Send(Msg(3, kServerId, PhaseTag::kAggAck, Bytes(1)));
  EXPECT_EQ(bus.storage_high_water().at(kServerId),
            15u + 2 * kEnvelopeHeaderBytes);
  bus.ResetCounters();
  EXPECT_EQ(bus.Total().messages, 0u);
}

TEST(SimBus, FilterTamperPurgeAndTranscript) {
  SimBus bus;
  bus.SetRecording(true);
  bus.SetFilter([](const Envelope& e) { return e.sender != 2; });
  bus.SetTamper([](Envelope&, Bytes& wire) { wire.back() ^= 0xff; });
  bus.Send(Msg(1, kServerId, PhaseTag::kAggAck, {0x0f}));
  bus.Send(Msg(2, kServerId, PhaseTag::kAggAck, {0x0f}));
  EXPECT_EQ(bus.transcript().size(), 1u);
  auto got = bus.Drain(kServerId, PhaseTag::kAggAck);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].payload, Bytes{0xf0});
  bus.Send(Msg(kServerId, 1, PhaseTag::kAggAck, {1}));
  bus.Purge(1);
  EXPECT_TRUE(bus.Drain(1, PhaseTag::kAggAck).empty());
  bus.ClearTranscript();
  EXPECT_TRUE(bus.transcript().empty());
}

TEST(PhaseTags, NamesAndClasses) {
  EXPECT_STREQ(PhaseTagName(PhaseTag::kSlgShare), "slg-share");
  EXPECT_EQ(PayloadClassOf(PhaseTag::kAggShareKeys), PayloadClass::kAead);
  EXPECT_EQ(PayloadClassOf(PhaseTag::kAggMaskedInput), PayloadClass::kMasked);
  EXPECT_EQ(PayloadClassOf(PhaseTag::kSlgModel), PayloadClass::kHeCiphertext);
  EXPECT_EQ(PayloadClassOf(PhaseTag::kSetupAdvertise), PayloadClass::kPublicKey);
}

}  // namespace
}  // namespace fedreg
