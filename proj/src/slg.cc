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

#include "fedreg/slg.h"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg::slg {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double SigmoidCubic::Eval(double x) const {
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

RingVector SigmoidCubic::Encoded(const FpConfig& cfg) const {
  RingVector q(4);
  for (unsigned i = 0; i < 4; ++i) q[i] = FpEncode(c[i], 7 - 2 * i, cfg).value;
  return q;
}

SigmoidCubic FitSigmoidCubic(double bound, size_t grid) {
  if (!(bound > 0) || grid < 4) {
    throw Error(ErrorCode::kParameter, "sigmoid fit needs l > 0 and >= 4 points");
  }
  Eigen::MatrixXd a(grid, 4);
  Eigen::VectorXd b(grid);
  std::vector<double> xs(grid);
  for (size_t i = 0; i < grid; ++i) {
    // Symmetric grid: x_i = -x_{grid-1-i} exactly.
    const double x = bound * (2.0 * static_cast<double>(i) -
                              static_cast<double>(grid - 1)) /
                     static_cast<double>(grid - 1);
    xs[i] = x;
    a(i, 0) = 1.0;
    a(i, 1) = x;
    a(i, 2) = x * x;
    a(i, 3) = x * x * x;
    b(i) = Sigmoid(x);
  }
  Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);
  SigmoidCubic out;
  out.bound = bound;
  out.grid = grid;
  for (int i = 0; i < 4; ++i) out.c[i] = sol(i);
  for (double x : xs) {
    out.max_fit_error =
        std::max(out.max_fit_error, std::fabs(out.Eval(x) - Sigmoid(x)));
  }
  return out;
}

PathScales ScalesFor(ModelKind kind) {
  if (kind == ModelKind::kLogistic) return PathScales{7, 7, 8};
  return PathScales{2, 2, 3};
}

EncodedDataset EncodeDataset(const LocalDataset& data, ModelKind kind,
                             const FpConfig& cfg) {
  if (data.size() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "local dataset is empty");
  }
  if (data.x.size() != data.y.size()) {
    throw Error(ErrorCode::kDimension, "feature and label counts differ");
  }
  EncodedDataset out;
  const size_t n = data.features();
  const unsigned label_scale = ScalesFor(kind).label;
  for (size_t j = 0; j < data.size(); ++j) {
    if (data.x[j].size() != n) {
      throw Error(ErrorCode::kDimension, "ragged feature rows");
    }
    out.x.push_back(FpEncodeValues(data.x[j], 1, cfg));
    out.y.push_back(FpEncode(data.y[j], label_scale, cfg).value);
  }
  return out;
}

RingVector EncodeModel(const Model& theta, const FpConfig& cfg) {
  if (theta.empty()) throw Error(ErrorCode::kDimension, "empty model");
  RingVector out(theta.size());
  out[0] = FpEncode(theta[0], 2, cfg).value;
  for (size_t j = 1; j < theta.size(); ++j) {
    out[j] = FpEncode(theta[j], 1, cfg).value;
  }
  return out;
}

std::vector<double> DecodeGradient(std::span<const mpz_class> omega,
                                   ModelKind kind, const FpConfig& cfg) {
  const PathScales s = ScalesFor(kind);
  std::vector<double> out(omega.size());
  for (size_t j = 0; j < omega.size(); ++j) {
    out[j] = FpDecode(omega[j], j == 0 ? s.grad0 : s.gradj, cfg);
  }
  return out;
}

Ciphertext EncryptedInnerProduct(HeEvaluator& ev, std::span<const mpz_class> x,
                                 std::span<const Ciphertext> enc_model) {
  if (enc_model.size() != x.size() + 1) {
    throw Error(ErrorCode::kDimension,
                "model has " + std::to_string(enc_model.size()) +
                    " coefficients for " + std::to_string(x.size()) +
                    " features");
  }
  Ciphertext acc = enc_model[0];
  for (size_t j = 0; j < x.size(); ++j) {
    acc = ev.Add(acc, ev.ScalarMul(enc_model[j + 1], x[j]));
  }
  return acc;
}

namespace {

void CheckData(const EncodedDataset& data) {
  if (data.y.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "local dataset is empty");
  }
}

// Accumulates E(t_0) += E(e), E(t_j) += E(e)^{x_j}; the first point seeds
// the accumulator.
void Accumulate(HeEvaluator& ev, std::vector<Ciphertext>& t, bool first,
                const Ciphertext& e, std::span<const mpz_class> x) {
  if (first) {
    t.clear();
    t.push_back(e);
    for (const auto& xj : x) t.push_back(ev.ScalarMul(e, xj));
    return;
  }
  t[0] = ev.Add(t[0], e);
  for (size_t j = 0; j < x.size(); ++j) {
    t[j + 1] = ev.Add(t[j + 1], ev.ScalarMul(e, x[j]));
  }
}

GradientSharePair Share(HeEvaluator& ev, std::vector<Ciphertext> t,
                        const Ring& ring) {
  GradientSharePair out;
  out.user_share.resize(t.size());
  out.enc_server_share.reserve(t.size());
  for (size_t j = 0; j < t.size(); ++j) {
    out.user_share[j] = ring.Random(ev.rng());
    out.enc_server_share.push_back(ev.EncryptAdd(t[j], out.user_share[j]));
  }
  return out;
}

}  // namespace

GradientSharePair LinSlg(HeEvaluator& ev, const EncodedDataset& data,
                         std::span<const Ciphertext> enc_model,
                         const Ring& ring) {
  CheckData(data);
  std::vector<Ciphertext> t;
  for (size_t i = 0; i < data.y.size(); ++i) {
    Ciphertext ip = EncryptedInnerProduct(ev, data.x[i], enc_model);
    Ciphertext e = ev.Add(ip, ev.Encrypt(ring.Neg(data.y[i])));
    Accumulate(ev, t, i == 0, e, data.x[i]);
  }
  return Share(ev, std::move(t), ring);
}

MaskedBatch LogSlgMask(HeEvaluator& ev, std::span<const Ciphertext> enc_model,
                       const EncodedDataset& data, const Ring& ring,
                       uint64_t session, MaskState& state,
                       const LogSlgOptions& options) {
  CheckData(data);
  MaskedBatch batch;
  batch.session = session;
  state = MaskState{};
  state.session = session;
  for (size_t i = 0; i < data.y.size(); ++i) {
    Ciphertext ip = EncryptedInnerProduct(ev, data.x[i], enc_model);
    mpz_class c = options.zero_masks ? mpz_class(0) : ring.Random(ev.rng());
    batch.enc_z.push_back(ev.EncryptAdd(ip, c));
    state.masks.push_back(std::move(c));
    state.enc_inner.push_back(std::move(ip));
  }
  return batch;
}

mpz_class SigmoidRing(std::span<const mpz_class> q, const mpz_class& z,
                      const Ring& ring) {
  if (q.size() != 4) throw Error(ErrorCode::kDimension, "need 4 coefficients");
  mpz_class acc = q[3];
  for (int i = 2; i >= 0; --i) acc = ring.Reduce(acc * z + q[i]);
  return acc;
}

AssistReply SigmoidAssist(const AheSecretKey& sk, HeEvaluator& server_ev,
                          const MaskedBatch& batch, std::span<const mpz_class> q,
                          const Ring& ring) {
  AssistReply reply;
  reply.session = batch.session;
  for (const auto& ct : batch.enc_z) {
    const mpz_class z = server_ev.Decrypt(sk, ct);
    reply.enc_z2.push_back(server_ev.Encrypt(ring.Mul(z, z)));
    reply.enc_sig3z.push_back(server_ev.Encrypt(SigmoidRing(q, z, ring)));
  }
  return reply;
}

UnmaskCoefficients CorrectedUnmask(std::span<const mpz_class> q,
                                   const mpz_class& r, const Ring& ring) {
  if (q.size() != 4) throw Error(ErrorCode::kDimension, "need 4 coefficients");
  const mpz_class r2 = ring.Mul(r, r);
  const mpz_class r3 = ring.Mul(r2, r);
  UnmaskCoefficients u;
  u.z2 = ring.Neg(3 * q[3] * r);
  u.y = ring.Neg(2 * q[2] * r - 3 * q[3] * r2);
  u.constant = ring.Neg(q[1] * r + q[2] * r2 - 2 * q[3] * r3);
  return u;
}

GradientSharePair LogSlgUnmaskAndShare(HeEvaluator& ev,
                                       const AssistReply& reply,
                                       const MaskState& state,
                                       const EncodedDataset& data,
                                       std::span<const mpz_class> q,
                                       const Ring& ring) {
  CheckData(data);
  if (reply.session != state.session) {
    throw Error(ErrorCode::kSessionMismatch,
                "assist reply belongs to session " +
                    std::to_string(reply.session) + ", expected " +
                    std::to_string(state.session));
  }
  const size_t d = data.y.size();
  if (reply.enc_z2.size() != d || reply.enc_sig3z.size() != d ||
      state.masks.size() != d || state.enc_inner.size() != d) {
    throw Error(ErrorCode::kSessionMismatch, "batch sizes disagree");
  }
  std::vector<Ciphertext> t;
  for (size_t i = 0; i < d; ++i) {
    const mpz_class& c = state.masks[i];
    // E(z^2)^{-3 q_3 c} and E(y)^{-(2 q_2 c - 3 q_3 c^2)}, each as two
    // exponentiations.
    Ciphertext u1 =
        ev.ScalarMul(ev.ScalarMul(reply.enc_z2[i], c), ring.Neg(3 * q[3]));
    Ciphertext u2 = ev.ScalarMul(ev.ScalarMul(state.enc_inner[i], c),
                                 ring.Neg(2 * q[2] - 3 * q[3] * c));
    Ciphertext acc = ev.Add(ev.Add(reply.enc_sig3z[i], u1), u2);
    const UnmaskCoefficients coeff = CorrectedUnmask(q, c, ring);
    acc = ev.Add(acc, ev.Encrypt(coeff.constant));
    Ciphertext e = ev.Add(acc, ev.Encrypt(ring.Neg(data.y[i])));
    Accumulate(ev, t, i == 0, e, data.x[i]);
  }
  return Share(ev, std::move(t), ring);
}

HeOpCounts OpCountFormula(ModelKind kind, uint64_t n, uint64_t d) {
  HeOpCounts c;
  if (kind == ModelKind::kLogistic) {
    c.ct_mul = (2 * n + 5) * d - (n + 1);
    c.const_mul = 2 * (n + 2) * d;
    c.enc = 3 * d + (n + 1);
  } else {
    c.ct_mul = 2 * (n + 1) * d - (n + 1);
    c.const_mul = 2 * n * d;
    c.enc = d + (n + 1);
  }
  return c;
}

uint64_t CommBitsFormula(ModelKind kind, uint64_t n, uint64_t d,
                         uint64_t lambda_ct) {
  if (kind == ModelKind::kLogistic) return (2 * (n + 1) + 3 * d) * lambda_ct;
  return 2 * (n + 1) * lambda_ct;
}

SlgExchange RunSlgSession(SimBus& bus, uint64_t session, uint32_t user,
                          ModelKind kind, const AheKeyPair& server_keys,
                          std::span<const Ciphertext> enc_model,
                          const EncodedDataset& data,
                          std::span<const mpz_class> q, const Ring& ring,
                          Csprng& user_rng, Csprng& server_rng,
                          const LogSlgOptions& options) {
  const AhePublicKey& pk = *server_keys.pk;
  HeEvaluator user_ev(pk, user_rng);
  HeEvaluator server_ev(pk, server_rng);
  SlgExchange out;
  auto send = [&](PhaseTag tag, uint32_t from, uint32_t to, Bytes payload) {
    out.ciphertext_bits += payload.size() * 8;
    bus.Send(Envelope{session, tag, from, to, std::move(payload)});
  };
  auto receive = [&](uint32_t node, PhaseTag tag) {
    auto msgs = bus.Drain(node, tag);
    if (msgs.size() != 1) {
      throw Error(ErrorCode::kPhase, std::string("expected one ") +
                                         PhaseTagName(tag) + " message");
    }
    return UnpackCiphertexts(pk, msgs[0].payload);
  };

  send(PhaseTag::kSlgModel, kServerId, user, PackCiphertexts(pk, enc_model));
  const auto model = receive(user, PhaseTag::kSlgModel);

  if (kind == ModelKind::kLogistic) {
    MaskState state;
    MaskedBatch batch =
        LogSlgMask(user_ev, model, data, ring, session, state, options);
    send(PhaseTag::kSlgMasked, user, kServerId,
         PackCiphertexts(pk, batch.enc_z));
    MaskedBatch at_server{session, receive(kServerId, PhaseTag::kSlgMasked)};
    AssistReply reply =
        SigmoidAssist(*server_keys.sk, server_ev, at_server, q, ring);
    std::vector<Ciphertext> both = reply.enc_z2;
    both.insert(both.end(), reply.enc_sig3z.begin(), reply.enc_sig3z.end());
    send(PhaseTag::kSlgAssist, kServerId, user, PackCiphertexts(pk, both));
    auto got = receive(user, PhaseTag::kSlgAssist);
    const size_t d = got.size() / 2;
    AssistReply at_user;
    at_user.session = session;
    at_user.enc_z2.assign(got.begin(), got.begin() + d);
    at_user.enc_sig3z.assign(got.begin() + d, got.end());
    out.shares = LogSlgUnmaskAndShare(user_ev, at_user, state, data, q, ring);
  } else {
    out.shares = LinSlg(user_ev, data, model, ring);
  }
  send(PhaseTag::kSlgShare, user, kServerId,
       PackCiphertexts(pk, out.shares.enc_server_share));
  out.shares.enc_server_share = receive(kServerId, PhaseTag::kSlgShare);
  out.user_ops = user_ev.counts();
  out.server_ops = server_ev.counts();
  return out;
}

}  // namespace fedreg::slg
