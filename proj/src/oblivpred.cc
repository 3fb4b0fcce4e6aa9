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

#include "fedreg/oblivpred.h"

#include <nlohmann/json.hpp>

#include "fedreg/error.h"

namespace fedreg::oblivpred {

namespace {

using nlohmann::json;

std::string CtToB64(const AhePublicKey& pk, const Ciphertext& ct) {
  return Base64Encode(pk.SerializeCiphertext(ct));
}

Ciphertext CtFromB64(const AhePublicKey& pk, const json& j) {
  if (!j.is_string()) throw Error(ErrorCode::kParse, "ciphertext must be a string");
  return pk.ParseCiphertext(Base64Decode(j.get<std::string>()));
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

uint64_t SessionOf(const json& j) {
  if (!j.contains("session") || !j["session"].is_number_unsigned()) {
    throw Error(ErrorCode::kParse, "missing session");
  }
  return j["session"].get<uint64_t>();
}

const json& Field(const json& j, const char* name) {
  if (!j.contains(name)) {
    throw Error(ErrorCode::kParse, std::string("missing field ") + name);
  }
  return j[name];
}

}  // namespace

PredictionClient::PredictionClient(AheKeyPair keys, const FpConfig& fp,
                                   const slg::SigmoidCubic& sigmoid,
                                   Csprng& rng)
    : keys_(std::move(keys)),
      fp_(fp),
      q_(sigmoid.Encoded(fp)),
      ev_(*keys_.pk, rng) {
  if (!keys_.sk) throw Error(ErrorCode::kParameter, "client needs a secret key");
  if (keys_.pk->k() != fp.k) {
    throw Error(ErrorCode::kConfig, "key message space differs from k");
  }
}

PredictRequest PredictionClient::Request(std::span<const double> x,
                                         uint64_t session) {
  PredictRequest r;
  r.session = session;
  r.public_key = SerializePublicKey(*keys_.pk);
  r.enc_input = ev_.Encrypt(FpEncodeValues(x, 1, fp_));
  return r;
}

AssistReply PredictionClient::Assist(const MaskedOutput& masked) {
  const Ring ring = fp_.ring();
  const mpz_class z = ev_.Decrypt(*keys_.sk, masked.enc_z);
  AssistReply a;
  a.session = masked.session;
  a.enc_z2 = ev_.Encrypt(ring.Mul(z, z));
  a.enc_sig3z = ev_.Encrypt(slg::SigmoidRing(q_, z, ring));
  return a;
}

double PredictionClient::DecodeLinear(const PredictResponse& response) {
  return FpDecode(ev_.Decrypt(*keys_.sk, response.enc_output), 2, fp_);
}

double PredictionClient::DecodeLogistic(const PredictResponse& response) {
  return FpDecode(ev_.Decrypt(*keys_.sk, response.enc_output), 7, fp_);
}

PredictionServer::PredictionServer(Model theta, const FpConfig& fp,
                                   const slg::SigmoidCubic& sigmoid,
                                   Csprng& rng, ServerOptions options)
    : theta_(std::move(theta)),
      fp_(fp),
      theta_enc_(slg::EncodeModel(theta_, fp)),
      q_(sigmoid.Encoded(fp)),
      rng_(rng),
      options_(options) {
  if (theta_.empty()) throw Error(ErrorCode::kDimension, "empty model");
}

Ciphertext PredictionServer::InnerProduct(HeEvaluator& ev,
                                          const PredictRequest& request) {
  if (request.enc_input.size() != features()) {
    throw Error(ErrorCode::kDimension,
                "request has " + std::to_string(request.enc_input.size()) +
                    " features, model expects " + std::to_string(features()));
  }
  Ciphertext acc = ev.Encrypt(theta_enc_[0]);
  for (size_t j = 0; j < features(); ++j) {
    ev.public_key().Check(request.enc_input[j]);
    acc = ev.Add(acc, ev.ScalarMul(request.enc_input[j], theta_enc_[j + 1]));
  }
  return acc;
}

PredictResponse PredictionServer::Linear(const PredictRequest& request) {
  auto pk = DeserializePublicKey(request.public_key);
  HeEvaluator ev(*pk, rng_);
  PredictResponse out;
  out.session = request.session;
  out.enc_output = InnerProduct(ev, request);
  counts_ += ev.counts();
  return out;
}

MaskedOutput PredictionServer::Mask(const PredictRequest& request) {
  if (pending_.count(request.session)) {
    throw Error(ErrorCode::kSessionMismatch,
                "session " + std::to_string(request.session) + " already open");
  }
  auto pk = DeserializePublicKey(request.public_key);
  HeEvaluator ev(*pk, rng_);
  Pending p;
  p.pk = pk;
  p.enc_y = InnerProduct(ev, request);
  p.r = options_.zero_mask ? mpz_class(0) : fp_.ring().Random(rng_);
  MaskedOutput out;
  out.session = request.session;
  out.enc_z = ev.EncryptAdd(p.enc_y, p.r);
  counts_ += ev.counts();
  pending_.emplace(request.session, std::move(p));
  return out;
}

PredictResponse PredictionServer::Unmask(const AssistReply& reply) {
  auto it = pending_.find(reply.session);
  if (it == pending_.end()) {
    throw Error(ErrorCode::kSessionMismatch,
                "no open session " + std::to_string(reply.session));
  }
  Pending p = std::move(it->second);
  pending_.erase(it);
  p.pk->Check(reply.enc_z2);
  p.pk->Check(reply.enc_sig3z);
  HeEvaluator ev(*p.pk, rng_);
  const slg::UnmaskCoefficients c =
      slg::CorrectedUnmask(q_, p.r, fp_.ring());
  Ciphertext acc = ev.Add(reply.enc_sig3z, ev.ScalarMul(reply.enc_z2, c.z2));
  acc = ev.Add(acc, ev.ScalarMul(p.enc_y, c.y));
  acc = ev.Add(acc, ev.Encrypt(c.constant));
  counts_ += ev.counts();
  PredictResponse out;
  out.session = reply.session;
  out.enc_output = acc;
  return out;
}

PredictionResult LinPredict(PredictionClient& client, PredictionServer& server,
                            std::span<const double> x, uint64_t session) {
  const size_t ct = client.keys().pk->ciphertext_bytes();
  PredictRequest req = client.Request(x, session);
  PredictResponse resp = server.Linear(req);
  PredictionResult out;
  out.value = client.DecodeLinear(resp);
  out.user_bytes = (req.enc_input.size() + 1) * ct;
  return out;
}

PredictionResult LogPredict(PredictionClient& client, PredictionServer& server,
                            std::span<const double> x, uint64_t session) {
  const size_t ct = client.keys().pk->ciphertext_bytes();
  PredictRequest req = client.Request(x, session);
  MaskedOutput masked = server.Mask(req);
  AssistReply assist = client.Assist(masked);
  PredictResponse resp = server.Unmask(assist);
  PredictionResult out;
  out.value = client.DecodeLogistic(resp);
  out.user_bytes = (req.enc_input.size() + 4) * ct;
  return out;
}

namespace {

// The server learns the user's public key out of band.
struct BusLink {
  SimBus& bus;
  uint32_t user;
  uint64_t session;
  const AhePublicKey& pk;
  uint64_t user_bytes = 0;

  void Up(PhaseTag tag, std::span<const Ciphertext> cts) {
    Bytes payload = PackCiphertexts(pk, cts);
    user_bytes += payload.size();
    bus.Send(Envelope{session, tag, user, kServerId, std::move(payload)});
  }
  void Down(PhaseTag tag, const Ciphertext& ct) {
    Bytes payload = PackCiphertexts(pk, std::span<const Ciphertext>(&ct, 1));
    user_bytes += payload.size();
    bus.Send(Envelope{session, tag, kServerId, user, std::move(payload)});
  }
  std::vector<Ciphertext> Receive(uint32_t node, PhaseTag tag) {
    for (auto& env : bus.Drain(node, tag)) {
      if (env.session == session) return UnpackCiphertexts(pk, env.payload);
    }
    throw Error(ErrorCode::kProtocolAbort,
                std::string("no ") + PhaseTagName(tag) + " message");
  }
};

}  // namespace

PredictionResult LinPredictOverBus(SimBus& bus, uint32_t user,
                                   PredictionClient& client,
                                   PredictionServer& server,
                                   std::span<const double> x,
                                   uint64_t session) {
  BusLink link{bus, user, session, *client.keys().pk};
  PredictRequest req = client.Request(x, session);
  link.Up(PhaseTag::kPredictInput, req.enc_input);
  req.enc_input = link.Receive(kServerId, PhaseTag::kPredictInput);
  PredictResponse resp = server.Linear(req);
  link.Down(PhaseTag::kPredictOutput, resp.enc_output);
  resp.enc_output = link.Receive(user, PhaseTag::kPredictOutput).at(0);
  return PredictionResult{client.DecodeLinear(resp), link.user_bytes};
}

PredictionResult LogPredictOverBus(SimBus& bus, uint32_t user,
                                   PredictionClient& client,
                                   PredictionServer& server,
                                   std::span<const double> x,
                                   uint64_t session) {
  BusLink link{bus, user, session, *client.keys().pk};
  PredictRequest req = client.Request(x, session);
  link.Up(PhaseTag::kPredictInput, req.enc_input);
  req.enc_input = link.Receive(kServerId, PhaseTag::kPredictInput);

  MaskedOutput masked = server.Mask(req);
  link.Down(PhaseTag::kPredictMasked, masked.enc_z);
  masked.enc_z = link.Receive(user, PhaseTag::kPredictMasked).at(0);

  AssistReply assist = client.Assist(masked);
  const Ciphertext pair[] = {assist.enc_z2, assist.enc_sig3z};
  link.Up(PhaseTag::kPredictAssist, pair);
  auto got = link.Receive(kServerId, PhaseTag::kPredictAssist);
  if (got.size() != 2) throw Error(ErrorCode::kMalformed, "assist needs 2 ciphertexts");
  assist.enc_z2 = got[0];
  assist.enc_sig3z = got[1];

  PredictResponse resp = server.Unmask(assist);
  link.Down(PhaseTag::kPredictOutput, resp.enc_output);
  resp.enc_output = link.Receive(user, PhaseTag::kPredictOutput).at(0);
  return PredictionResult{client.DecodeLogistic(resp), link.user_bytes};
}

std::string RequestToJson(const PredictRequest& r, const AhePublicKey& pk) {
  json j;
  j["session"] = r.session;
  j["public_key"] = Base64Encode(r.public_key);
  j["enc_input"] = json::array();
  for (const auto& ct : r.enc_input) j["enc_input"].push_back(CtToB64(pk, ct));
  return j.dump();
}

PredictRequest RequestFromJson(const std::string& text) {
  const json j = Parse(text);
  PredictRequest r;
  r.session = SessionOf(j);
  const json& key = Field(j, "public_key");
  if (!key.is_string()) throw Error(ErrorCode::kParse, "public_key must be a string");
  r.public_key = Base64Decode(key.get<std::string>());
  auto pk = DeserializePublicKey(r.public_key);
  const json& input = Field(j, "enc_input");
  if (!input.is_array()) throw Error(ErrorCode::kParse, "enc_input must be an array");
  for (const auto& c : input) r.enc_input.push_back(CtFromB64(*pk, c));
  return r;
}

std::string MaskedToJson(const MaskedOutput& m, const AhePublicKey& pk) {
  return json{{"session", m.session}, {"enc_z", CtToB64(pk, m.enc_z)}}.dump();
}

MaskedOutput MaskedFromJson(const std::string& text, const AhePublicKey& pk) {
  const json j = Parse(text);
  return MaskedOutput{SessionOf(j), CtFromB64(pk, Field(j, "enc_z"))};
}

std::string AssistToJson(const AssistReply& a, const AhePublicKey& pk) {
  return json{{"session", a.session},
              {"enc_z2", CtToB64(pk, a.enc_z2)},
              {"enc_sig3z", CtToB64(pk, a.enc_sig3z)}}
      .dump();
}

AssistReply AssistFromJson(const std::string& text, const AhePublicKey& pk) {
  const json j = Parse(text);
  return AssistReply{SessionOf(j), CtFromB64(pk, Field(j, "enc_z2")),
                     CtFromB64(pk, Field(j, "enc_sig3z"))};
}

std::string ResponseToJson(const PredictResponse& r, const AhePublicKey& pk) {
  return json{{"session", r.session},
              {"enc_output", CtToB64(pk, r.enc_output)}}
      .dump();
}

PredictResponse ResponseFromJson(const std::string& text,
                                 const AhePublicKey& pk) {
  const json j = Parse(text);
  return PredictResponse{SessionOf(j), CtFromB64(pk, Field(j, "enc_output"))};
}

}  // namespace fedreg::oblivpred
