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

#include "fedreg/secagg.h"

#include <algorithm>
#include <string>
#include <utility>

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"
#include "fedreg/secret_share.h"

namespace fedreg::secagg {

using crypto::Digest;
using crypto::Key128;

const char* AggPhaseName(AggPhase phase) {
  switch (phase) {
    case AggPhase::kAdvertise: return "advertise";
    case AggPhase::kShareKeys: return "share-keys";
    case AggPhase::kMaskedInput: return "masked-input";
    case AggPhase::kConsistency: return "consistency";
    case AggPhase::kUnmask: return "unmask";
    case AggPhase::kDone: return "done";
  }
  return "unknown";
}

const char* AggStatusName(AggStatus status) {
  switch (status) {
    case AggStatus::kOk: return "ok";
    case AggStatus::kBelowThreshold: return "below-threshold";
    case AggStatus::kInconsistentAlive: return "inconsistent-alive-set";
    case AggStatus::kAuthenticationFailure: return "authentication-failure";
  }
  return "unknown";
}

bool DropSchedule::Active(uint32_t user, AggPhase phase) const {
  auto it = drop_before.find(user);
  return it == drop_before.end() || phase < it->second;
}

std::vector<uint32_t> ExpectedSurvivors(std::span<const uint32_t> participants,
                                        const DropSchedule& drops) {
  std::vector<uint32_t> out;
  for (uint32_t u : participants) {
    if (drops.Active(u, AggPhase::kMaskedInput)) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::vector<uint32_t>> PredictOutcome(
    std::span<const uint32_t> participants, const DropSchedule& drops,
    unsigned t) {
  std::vector<uint32_t> alive;
  for (int p = 0; p <= static_cast<int>(AggPhase::kUnmask); ++p) {
    std::vector<uint32_t> next;
    for (uint32_t u : participants) {
      if (drops.Active(u, static_cast<AggPhase>(p))) next.push_back(u);
    }
    if (next.size() < t) return std::nullopt;
    if (static_cast<AggPhase>(p) == AggPhase::kMaskedInput) alive = next;
  }
  std::sort(alive.begin(), alive.end());
  return alive;
}

Digest DeriveRoundKey(const Digest& master, uint64_t round) {
  return crypto::HashChain(master, round);
}

RingVector MaskInput(const Ring& ring, std::span<const mpz_class> x,
                     uint32_t self, const Key128& self_seed,
                     const std::map<uint32_t, Key128>& pair_seeds) {
  RingVector y(x.begin(), x.end());
  RingVector self_mask = crypto::PrgRing(self_seed, ring, x.size());
  for (size_t j = 0; j < y.size(); ++j) y[j] += self_mask[j];
  for (const auto& [v, seed] : pair_seeds) {
    if (v == self) continue;
    RingVector m = crypto::PrgRing(seed, ring, x.size());
    for (size_t j = 0; j < y.size(); ++j) {
      if (self < v) {
        y[j] += m[j];
      } else {
        y[j] -= m[j];
      }
    }
  }
  for (auto& v : y) v = ring.Reduce(v);
  return y;
}

namespace {

struct Chain {
  Digest master{};
  Digest value{};
  uint64_t at = 0;

  void Reset(const Digest& m) {
    master = m;
    value = m;
    at = 0;
  }
  const Digest& At(uint64_t round) {
    if (round < at) {
      value = master;
      at = 0;
    }
    while (at < round) {
      value = crypto::Sha256(value);
      ++at;
    }
    return value;
  }
};

struct PeerState {
  Bytes channel_pk;
  Bytes mask_pk;
  Bytes own_mask_pk;
  Chain channel;
  Chain mask;
};

struct HeldShares {
  shamir::Share self_seed;
  shamir::Share mask_key;
};

struct User {
  uint32_t id = 0;
  Csprng rng;
  crypto::EcKeyPair channel;
  crypto::EcKeyPair mask;
  bool ready = false;
  bool rekey_pending = false;
  bool rotated = false;
  Chain server;
  std::map<uint32_t, PeerState> peers;
  Key128 self_seed{};
  std::map<uint32_t, HeldShares> held;
  std::vector<uint32_t> alive_seen;
};

crypto::Nonce96 MakeNonce(PhaseTag tag, uint64_t round, uint32_t sender) {
  crypto::Nonce96 n{};
  n[0] = static_cast<uint8_t>(tag);
  for (int i = 0; i < 7; ++i) n[1 + i] = uint8_t(round >> (48 - 8 * i));
  for (int i = 0; i < 4; ++i) n[8 + i] = uint8_t(sender >> (24 - 8 * i));
  return n;
}

Bytes Aad(const Envelope& env) {
  ByteWriter w;
  w.PutU64(env.session);
  w.PutU8(static_cast<uint8_t>(env.phase));
  w.PutU32(env.sender);
  w.PutU32(env.receiver);
  return std::move(w).bytes();
}

Bytes EncodeIds(const std::vector<uint32_t>& ids) {
  ByteWriter w;
  w.PutU32(static_cast<uint32_t>(ids.size()));
  for (uint32_t id : ids) w.PutU32(id);
  return std::move(w).bytes();
}

std::vector<uint32_t> DecodeIds(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  std::vector<uint32_t> ids(r.GetU32());
  for (auto& id : ids) id = r.GetU32();
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing id bytes");
  return ids;
}

Digest AgreeOrJunk(const mpz_class& secret, std::span<const uint8_t> pk,
                   Csprng& rng) {
  try {
    return crypto::EcAgree(secret, pk);
  } catch (const Error&) {
    Digest junk;
    rng.Fill(junk);
    return junk;
  }
}

Key128 SeedFromMpz(const mpz_class& v) {
  Bytes raw = MpzToBytes(v, 16);
  Key128 k{};
  std::copy(raw.begin(), raw.end(), k.begin());
  return k;
}

bool Contains(const std::vector<uint32_t>& sorted, uint32_t v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

}  // namespace

struct SecAggNetwork::Impl {
  Impl(SimBus& b, std::vector<uint32_t> u, unsigned bits, uint64_t s)
      : bus(b), users(std::move(u)), ring(bits), seed(s),
        server_rng(s, "secagg/server") {}

  SimBus& bus;
  std::vector<uint32_t> users;
  Ring ring;
  uint64_t seed;
  Csprng server_rng;
  crypto::EcKeyPair server_key;
  std::map<uint32_t, User> state;
  std::map<uint32_t, Bytes> dir_channel;
  std::map<uint32_t, Bytes> dir_mask;
  std::map<uint32_t, Chain> server_chain;
  uint64_t round = 0;
  bool setup_done = false;
};

SecAggNetwork::SecAggNetwork(SimBus& bus, std::vector<uint32_t> users,
                             unsigned ring_bits, uint64_t seed)
    : impl_(std::make_unique<Impl>(bus, std::move(users), ring_bits, seed)) {
  std::sort(impl_->users.begin(), impl_->users.end());
  if (std::adjacent_find(impl_->users.begin(), impl_->users.end()) !=
          impl_->users.end() ||
      (!impl_->users.empty() && impl_->users.front() == kServerId)) {
    throw Error(ErrorCode::kParameter, "user ids must be distinct and non-zero");
  }
  for (uint32_t u : impl_->users) {
    User user;
    user.id = u;
    user.rng = Csprng(seed, "secagg/user/" + std::to_string(u));
    impl_->state.emplace(u, std::move(user));
  }
}

SecAggNetwork::~SecAggNetwork() = default;

uint64_t SecAggNetwork::round() const { return impl_->round; }
const Ring& SecAggNetwork::ring() const { return impl_->ring; }
const std::vector<uint32_t>& SecAggNetwork::users() const {
  return impl_->users;
}

crypto::Digest SecAggNetwork::ChannelMaster(uint32_t u, uint32_t v) const {
  return impl_->state.at(u).peers.at(v).channel.master;
}

size_t SecAggNetwork::DistinctPairwiseKeys() const {
  std::set<Digest> keys;
  for (const auto& [u, user] : impl_->state) {
    for (const auto& [v, peer] : user.peers) keys.insert(peer.channel.master);
  }
  return keys.size();
}

bool SecAggNetwork::MaskKeyRotated(uint32_t u) const {
  return impl_->state.at(u).rotated;
}

std::optional<std::vector<uint32_t>> SecAggNetwork::Setup(
    unsigned t, const std::set<uint32_t>& absent) {
  Impl& s = *impl_;
  if (s.setup_done) throw Error(ErrorCode::kPhase, "setup already completed");
  SimBus& bus = s.bus;
  s.server_key = crypto::EcGenerate(s.server_rng);

  for (uint32_t u : s.users) {
    if (absent.count(u)) continue;
    User& user = s.state.at(u);
    user.channel = crypto::EcGenerate(user.rng);
    user.mask = crypto::EcGenerate(user.rng);
    Bytes payload = user.channel.public_key;
    payload.insert(payload.end(), user.mask.public_key.begin(),
                   user.mask.public_key.end());
    bus.Send(Envelope{0, PhaseTag::kSetupAdvertise, u, kServerId, payload});
  }

  std::vector<uint32_t> registered;
  for (const auto& env : bus.Drain(kServerId, PhaseTag::kSetupAdvertise)) {
    if (env.payload.size() != 66 || !s.state.count(env.sender)) continue;
    s.dir_channel[env.sender] =
        Bytes(env.payload.begin(), env.payload.begin() + 33);
    s.dir_mask[env.sender] = Bytes(env.payload.begin() + 33, env.payload.end());
    registered.push_back(env.sender);
  }
  std::sort(registered.begin(), registered.end());
  if (registered.size() < t) return std::nullopt;

  ByteWriter dir;
  dir.PutRaw(s.server_key.public_key);
  dir.PutU32(static_cast<uint32_t>(registered.size()));
  for (uint32_t u : registered) {
    dir.PutU32(u);
    dir.PutRaw(s.dir_channel[u]);
    dir.PutRaw(s.dir_mask[u]);
  }
  for (uint32_t u : registered) {
    bus.Send(Envelope{0, PhaseTag::kSetupDirectory, kServerId, u, dir.bytes()});
    Chain c;
    c.Reset(crypto::EcAgree(s.server_key.secret, s.dir_channel[u]));
    s.server_chain[u] = c;
  }

  for (uint32_t u : registered) {
    User& user = s.state.at(u);
    for (const auto& env : bus.Drain(u, PhaseTag::kSetupDirectory)) {
      ByteReader r(env.payload);
      auto spk = r.GetRaw(33);
      Bytes server_pk(spk.begin(), spk.end());
      user.server.Reset(AgreeOrJunk(user.channel.secret, server_pk, user.rng));
      const uint32_t count = r.GetU32();
      for (uint32_t i = 0; i < count; ++i) {
        const uint32_t v = r.GetU32();
        auto cpk = r.GetRaw(33);
        auto mpk = r.GetRaw(33);
        if (v == u) continue;
        PeerState peer;
        peer.channel_pk.assign(cpk.begin(), cpk.end());
        peer.mask_pk.assign(mpk.begin(), mpk.end());
        peer.own_mask_pk = user.mask.public_key;
        peer.channel.Reset(AgreeOrJunk(user.channel.secret, cpk, user.rng));
        peer.mask.Reset(AgreeOrJunk(user.mask.secret, mpk, user.rng));
        user.peers[v] = std::move(peer);
      }
      user.ready = true;
    }
  }
  s.setup_done = true;
  return registered;
}

AggResult SecAggNetwork::Run(std::span<const uint32_t> participants,
                             const std::map<uint32_t, RingVector>& inputs,
                             unsigned t, const DropSchedule& drops) {
  Impl& s = *impl_;
  if (!s.setup_done) throw Error(ErrorCode::kPhase, "setup has not run");
  if (t < 1) throw Error(ErrorCode::kParameter, "threshold must be positive");
  SimBus& bus = s.bus;
  const Ring& ring = s.ring;
  const size_t width = ring.byte_width();

  std::vector<uint32_t> group(participants.begin(), participants.end());
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());
  size_t dim = 0;
  bool have_dim = false;
  for (uint32_t u : group) {
    if (!s.state.count(u) || !s.state.at(u).ready) {
      throw Error(ErrorCode::kParameter,
                  "user " + std::to_string(u) + " has no established keys");
    }
    auto it = inputs.find(u);
    if (it == inputs.end()) {
      throw Error(ErrorCode::kDimension,
                  "missing input for user " + std::to_string(u));
    }
    if (have_dim && it->second.size() != dim) {
      throw Error(ErrorCode::kDimension, "input dimensions differ");
    }
    dim = it->second.size();
    have_dim = true;
    for (const auto& x : it->second) {
      if (!ring.Contains(x)) throw Error(ErrorCode::kRange, "input not in ring");
    }
  }

  const uint64_t i = ++s.round;
  const uint64_t session = i;
  AggResult res;
  res.round = i;
  for (uint32_t u : s.users) bus.Purge(u);
  bus.Purge(kServerId);

  auto fail = [&](AggStatus st, AggPhase ph, std::string why) {
    res.status = st;
    res.failed_phase = ph;
    res.reason = std::move(why);
    for (uint32_t u : s.users) bus.Purge(u);
    bus.Purge(kServerId);
    return res;
  };
  auto below = [&](AggPhase ph, size_t have) {
    return fail(AggStatus::kBelowThreshold, ph,
                std::to_string(have) + " users alive, threshold " +
                    std::to_string(t));
  };

  // Advertise.
  for (uint32_t u : group) {
    if (!drops.Active(u, AggPhase::kAdvertise)) continue;
    User& user = s.state.at(u);
    ByteWriter w;
    if (user.rekey_pending) {
      user.mask = crypto::EcGenerate(user.rng);
      user.rotated = true;
      user.rekey_pending = false;
      w.PutU8(1);
      w.PutRaw(user.mask.public_key);
    } else {
      w.PutU8(0);
    }
    bus.Send(Envelope{session, PhaseTag::kAggAdvertise, u, kServerId,
                      std::move(w).bytes()});
  }
  std::vector<uint32_t> u1;
  for (const auto& env : bus.Drain(kServerId, PhaseTag::kAggAdvertise)) {
    if (!std::binary_search(group.begin(), group.end(), env.sender)) continue;
    ByteReader r(env.payload);
    if (r.GetU8() == 1) {
      auto pk = r.GetRaw(33);
      s.dir_mask[env.sender].assign(pk.begin(), pk.end());
    }
    u1.push_back(env.sender);
  }
  res.advertised = u1;
  if (u1.size() < t) return below(AggPhase::kAdvertise, u1.size());

  ByteWriter roster;
  roster.PutU64(i);
  roster.PutU32(static_cast<uint32_t>(u1.size()));
  for (uint32_t u : u1) {
    roster.PutU32(u);
    roster.PutRaw(s.dir_mask[u]);
  }
  for (uint32_t u : u1) {
    bus.Send(Envelope{session, PhaseTag::kAggRoster, kServerId, u,
                      roster.bytes()});
  }

  // ShareKeys.
  for (uint32_t u : u1) {
    if (!drops.Active(u, AggPhase::kShareKeys)) continue;
    User& user = s.state.at(u);
    auto msgs = bus.Drain(u, PhaseTag::kAggRoster);
    if (msgs.size() != 1) continue;
    ByteReader r(msgs[0].payload);
    if (r.GetU64() != i) continue;
    std::vector<uint32_t> peers(r.GetU32());
    for (auto& v : peers) {
      v = r.GetU32();
      auto mpk = r.GetRaw(33);
      if (v == u) continue;
      PeerState& peer = user.peers.at(v);
      if (!std::equal(mpk.begin(), mpk.end(), peer.mask_pk.begin(),
                      peer.mask_pk.end()) ||
          peer.own_mask_pk != user.mask.public_key) {
        peer.mask_pk.assign(mpk.begin(), mpk.end());
        peer.own_mask_pk = user.mask.public_key;
        peer.mask.Reset(AgreeOrJunk(user.mask.secret, mpk, user.rng));
      }
    }
    user.rng.Fill(user.self_seed);
    const mpz_class b = BytesToMpz(user.self_seed);
    auto b_shares = shamir::SplitAt(b, t, peers, user.rng);
    auto s_shares = shamir::SplitAt(user.mask.secret, t, peers, user.rng);
    user.held.clear();
    for (size_t j = 0; j < peers.size(); ++j) {
      const uint32_t v = peers[j];
      if (v == u) {
        user.held[u] = HeldShares{b_shares[j], s_shares[j]};
        continue;
      }
      ByteWriter pt;
      pt.PutU32(u);
      pt.PutU32(v);
      pt.PutRaw(user.mask.public_key);
      pt.PutRaw(shamir::EncodeShare(b_shares[j]));
      pt.PutRaw(shamir::EncodeShare(s_shares[j]));
      Envelope env{session, PhaseTag::kAggShareKeys, u, v, {}};
      const Key128 key = crypto::Truncate128(user.peers.at(v).channel.At(i));
      env.payload = crypto::AeadSeal(
          key, MakeNonce(PhaseTag::kAggShareKeys, i, u), pt.bytes(), Aad(env));
      bus.Send(env);
    }
    user.rekey_pending = true;
  }
  std::vector<uint32_t> u2;
  auto relayed = bus.Drain(kServerId, PhaseTag::kAggShareKeys);
  for (const auto& env : relayed) {
    if (Contains(u1, env.sender) &&
        (u2.empty() || u2.back() != env.sender)) {
      u2.push_back(env.sender);
    }
  }
  res.shared = u2;
  if (u2.size() < t) return below(AggPhase::kShareKeys, u2.size());
  for (const auto& env : relayed) {
    if (Contains(u2, env.receiver) && Contains(u2, env.sender)) {
      bus.Forward(env);
    }
  }

  // MaskedInput.
  for (uint32_t u : u2) {
    if (!drops.Active(u, AggPhase::kMaskedInput)) continue;
    User& user = s.state.at(u);
    std::map<uint32_t, Key128> pair_seeds;
    for (const auto& env : bus.Drain(u, PhaseTag::kAggShareKeys)) {
      PeerState& peer = user.peers.at(env.sender);
      const Key128 key = crypto::Truncate128(peer.channel.At(i));
      Bytes pt;
      try {
        pt = crypto::AeadOpen(key, MakeNonce(PhaseTag::kAggShareKeys, i,
                                             env.sender),
                              env.payload, Aad(env));
      } catch (const Error&) {
        return fail(AggStatus::kAuthenticationFailure, AggPhase::kMaskedInput,
                    "user " + std::to_string(u) + " rejected shares from " +
                        std::to_string(env.sender));
      }
      ByteReader r(pt);
      const uint32_t owner = r.GetU32();
      const uint32_t to = r.GetU32();
      if (owner != env.sender || to != u) {
        return fail(AggStatus::kAuthenticationFailure, AggPhase::kMaskedInput,
                    "share addressed to the wrong pair");
      }
      auto owner_pk = r.GetRaw(33);
      if (!std::equal(owner_pk.begin(), owner_pk.end(), peer.mask_pk.begin(),
                      peer.mask_pk.end())) {
        return fail(AggStatus::kAuthenticationFailure, AggPhase::kMaskedInput,
                    "roster key of " + std::to_string(owner) +
                        " differs from the key it authenticated");
      }
      HeldShares held;
      held.self_seed = shamir::DecodeShare(r.GetRaw(shamir::kShareWireBytes));
      held.mask_key = shamir::DecodeShare(r.GetRaw(shamir::kShareWireBytes));
      user.held[owner] = std::move(held);
      pair_seeds[owner] = crypto::Truncate128(peer.mask.At(i));
    }
    RingVector y =
        MaskInput(ring, inputs.at(u), u, user.self_seed, pair_seeds);
    ByteWriter w;
    for (const auto& v : y) w.PutMpzFixed(v, width);
    bus.Send(Envelope{session, PhaseTag::kAggMaskedInput, u, kServerId,
                      std::move(w).bytes()});
    user.rekey_pending = false;
  }
  std::vector<uint32_t> u3;
  std::map<uint32_t, RingVector> masked;
  for (const auto& env : bus.Drain(kServerId, PhaseTag::kAggMaskedInput)) {
    if (!Contains(u2, env.sender) || env.payload.size() != dim * width ||
        masked.count(env.sender)) {
      continue;
    }
    ByteReader r(env.payload);
    RingVector y(dim);
    for (auto& v : y) v = r.GetMpzFixed(width);
    masked[env.sender] = std::move(y);
    u3.push_back(env.sender);
  }
  res.alive = u3;
  if (u3.size() < t) return below(AggPhase::kMaskedInput, u3.size());

  // Consistency check.
  const Bytes alive_wire = EncodeIds(u3);
  const Digest alive_hash = crypto::Sha256(alive_wire);
  for (uint32_t u : u3) {
    bus.Send(Envelope{session, PhaseTag::kAggAliveSet, kServerId, u,
                      alive_wire});
  }
  for (uint32_t u : u3) {
    if (!drops.Active(u, AggPhase::kConsistency)) continue;
    User& user = s.state.at(u);
    auto msgs = bus.Drain(u, PhaseTag::kAggAliveSet);
    if (msgs.size() != 1) continue;
    user.alive_seen = DecodeIds(msgs[0].payload);
    if (user.alive_seen.size() < t) continue;
    Digest ack = crypto::Sha256(msgs[0].payload);
    bus.Send(Envelope{session, PhaseTag::kAggAck, u, kServerId,
                      Bytes(ack.begin(), ack.end())});
  }
  std::vector<uint32_t> u4;
  for (const auto& env : bus.Drain(kServerId, PhaseTag::kAggAck)) {
    if (!Contains(u3, env.sender)) continue;
    if (!std::equal(env.payload.begin(), env.payload.end(), alive_hash.begin(),
                    alive_hash.end())) {
      return fail(AggStatus::kInconsistentAlive, AggPhase::kConsistency,
                  "user " + std::to_string(env.sender) +
                      " acknowledged a different alive set");
    }
    u4.push_back(env.sender);
  }
  res.acknowledged = u4;
  if (u4.size() < t) return below(AggPhase::kConsistency, u4.size());

  // Unmask.
  for (uint32_t u : u4) {
    if (!drops.Active(u, AggPhase::kUnmask)) continue;
    User& user = s.state.at(u);
    std::vector<uint32_t> alive = user.alive_seen;
    std::sort(alive.begin(), alive.end());
    ByteWriter pt;
    pt.PutU32(static_cast<uint32_t>(user.held.size()));
    for (const auto& [owner, held] : user.held) {
      pt.PutU32(owner);
      if (Contains(alive, owner)) {
        pt.PutU8(static_cast<uint8_t>(ShareKind::kSelfSeed));
        pt.PutRaw(shamir::EncodeShare(held.self_seed));
      } else {
        pt.PutU8(static_cast<uint8_t>(ShareKind::kMaskKey));
        pt.PutRaw(shamir::EncodeShare(held.mask_key));
      }
    }
    Envelope env{session, PhaseTag::kAggUnmask, u, kServerId, {}};
    const Key128 key = crypto::Truncate128(user.server.At(i));
    env.payload = crypto::AeadSeal(key, MakeNonce(PhaseTag::kAggUnmask, i, u),
                                   pt.bytes(), Aad(env));
    bus.Send(env);
  }
  std::vector<uint32_t> u5;
  std::map<uint32_t, std::vector<shamir::Share>> seed_shares, key_shares;
  for (const auto& env : bus.Drain(kServerId, PhaseTag::kAggUnmask)) {
    if (!Contains(u4, env.sender)) continue;
    const Key128 key =
        crypto::Truncate128(s.server_chain.at(env.sender).At(i));
    Bytes pt;
    try {
      pt = crypto::AeadOpen(key, MakeNonce(PhaseTag::kAggUnmask, i, env.sender),
                            env.payload, Aad(env));
    } catch (const Error&) {
      return fail(AggStatus::kAuthenticationFailure, AggPhase::kUnmask,
                  "unmask message from " + std::to_string(env.sender) +
                      " failed authentication");
    }
    ByteReader r(pt);
    const uint32_t count = r.GetU32();
    for (uint32_t j = 0; j < count; ++j) {
      const uint32_t owner = r.GetU32();
      const auto kind = static_cast<ShareKind>(r.GetU8());
      shamir::Share share =
          shamir::DecodeShare(r.GetRaw(shamir::kShareWireBytes));
      if (!Contains(u2, owner)) continue;
      const bool alive = Contains(u3, owner);
      if (alive != (kind == ShareKind::kSelfSeed)) continue;
      res.server_share_kinds[owner].insert(kind);
      (alive ? seed_shares : key_shares)[owner].push_back(std::move(share));
    }
    u5.push_back(env.sender);
  }
  res.unmasked = u5;
  if (u5.size() < t) return below(AggPhase::kUnmask, u5.size());

  RingVector sum(dim, 0);
  for (uint32_t u : u3) {
    const auto& y = masked.at(u);
    for (size_t j = 0; j < dim; ++j) sum[j] += y[j];
  }
  for (uint32_t u : u3) {
    auto& shares = seed_shares[u];
    if (shares.size() < t) return below(AggPhase::kUnmask, shares.size());
    const Key128 b = SeedFromMpz(shamir::Reconstruct(shares, t));
    RingVector m = crypto::PrgRing(b, ring, dim);
    for (size_t j = 0; j < dim; ++j) sum[j] -= m[j];
  }
  for (uint32_t v : u2) {
    if (Contains(u3, v)) continue;
    auto& shares = key_shares[v];
    if (shares.size() < t) return below(AggPhase::kUnmask, shares.size());
    const mpz_class secret = shamir::Reconstruct(shares, t);
    for (uint32_t u : u3) {
      const Digest master = crypto::EcAgree(secret, s.dir_mask.at(u));
      const Key128 seed = crypto::Truncate128(DeriveRoundKey(master, i));
      RingVector m = crypto::PrgRing(seed, ring, dim);
      for (size_t j = 0; j < dim; ++j) {
        if (u < v) {
          sum[j] -= m[j];
        } else {
          sum[j] += m[j];
        }
      }
    }
  }
  for (auto& v : sum) v = ring.Reduce(v);
  res.sum = std::move(sum);
  res.status = AggStatus::kOk;
  for (uint32_t u : s.users) bus.Purge(u);
  return res;
}

AggResult RunDea(std::span<const uint32_t> users,
                 const std::map<uint32_t, RingVector>& inputs, unsigned t,
                 const DropSchedule& drops, unsigned ring_bits, uint64_t seed) {
  SimBus bus;
  SecAggNetwork net(bus, std::vector<uint32_t>(users.begin(), users.end()),
                    ring_bits, seed);
  auto registered = net.Setup(t);
  if (!registered) {
    AggResult res;
    res.status = AggStatus::kBelowThreshold;
    res.failed_phase = AggPhase::kAdvertise;
    res.reason = "key setup incomplete";
    return res;
  }
  return net.Run(users, inputs, t, drops);
}

}  // namespace fedreg::secagg
