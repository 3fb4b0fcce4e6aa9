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

#ifndef FEDREG_SLG_H_
#define FEDREG_SLG_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fedreg/ahe.h"
#include "fedreg/bus.h"
#include "fedreg/fixed_point.h"
#include "fedreg/ring.h"
#include "fedreg/types.h"

namespace fedreg::slg {

// Least-squares cubic approximation of the logistic function on [-l, l].
struct SigmoidCubic {
  std::array<double, 4> c{};
  double bound = 8.0;
  size_t grid = 1000;
  double max_fit_error = 0.0;

  double Eval(double x) const;
  // q_i = FE(c_i, (7 - 2i) tau).
  RingVector Encoded(const FpConfig& cfg) const;
};

SigmoidCubic FitSigmoidCubic(double bound = 8.0, size_t grid = 1000);

double Sigmoid(double x);

// Scale multipliers of the label and of the two gradient coordinate groups.
struct PathScales {
  unsigned label;
  unsigned grad0;
  unsigned gradj;
};

PathScales ScalesFor(ModelKind kind);

struct EncodedDataset {
  std::vector<RingVector> x;  // features at tau
  RingVector y;               // labels at PathScales::label
};

EncodedDataset EncodeDataset(const LocalDataset& data, ModelKind kind,
                             const FpConfig& cfg);
// theta_0 at 2 tau, the rest at tau.
RingVector EncodeModel(const Model& theta, const FpConfig& cfg);
// Decodes a gradient ring vector using the per-coordinate scales.
std::vector<double> DecodeGradient(std::span<const mpz_class> omega,
                                   ModelKind kind, const FpConfig& cfg);

// E(theta_0) * prod_j E(theta_j)^{x_j}.
Ciphertext EncryptedInnerProduct(HeEvaluator& ev, std::span<const mpz_class> x,
                                 std::span<const Ciphertext> enc_model);

struct GradientSharePair {
  std::vector<Ciphertext> enc_server_share;  // E(s)
  RingVector user_share;                     // r
};

GradientSharePair LinSlg(HeEvaluator& ev, const EncodedDataset& data,
                         std::span<const Ciphertext> enc_model,
                         const Ring& ring);

// Masked inner products sent to the server.
struct MaskedBatch {
  uint64_t session = 0;
  std::vector<Ciphertext> enc_z;
};

// What the user keeps between masking and unmasking.
struct MaskState {
  uint64_t session = 0;
  RingVector masks;
  std::vector<Ciphertext> enc_inner;
};

struct LogSlgOptions {
  bool zero_masks = false;
};

MaskedBatch LogSlgMask(HeEvaluator& ev, std::span<const Ciphertext> enc_model,
                       const EncodedDataset& data, const Ring& ring,
                       uint64_t session, MaskState& state,
                       const LogSlgOptions& options = {});

struct AssistReply {
  uint64_t session = 0;
  std::vector<Ciphertext> enc_z2;
  std::vector<Ciphertext> enc_sig3z;
};

// Server side: decrypts z, returns E(z^2) and E(sigma_3(z)).
AssistReply SigmoidAssist(const AheSecretKey& sk, HeEvaluator& server_ev,
                          const MaskedBatch& batch, std::span<const mpz_class> q,
                          const Ring& ring);

// Throws kSessionMismatch when the reply and state disagree.
GradientSharePair LogSlgUnmaskAndShare(HeEvaluator& ev,
                                       const AssistReply& reply,
                                       const MaskState& state,
                                       const EncodedDataset& data,
                                       std::span<const mpz_class> q,
                                       const Ring& ring);

// q_0 + q_1 z + q_2 z^2 + q_3 z^3 mod 2^k.
mpz_class SigmoidRing(std::span<const mpz_class> q, const mpz_class& z,
                      const Ring& ring);

// Ring coefficients of sigma_3(y) = sigma_3(z) + a z^2 + b y + c, z = y + r.
struct UnmaskCoefficients {
  mpz_class z2;
  mpz_class y;
  mpz_class constant;
};

UnmaskCoefficients CorrectedUnmask(std::span<const mpz_class> q,
                                   const mpz_class& r, const Ring& ring);

// Per-user operation counts of one SLG run.
HeOpCounts OpCountFormula(ModelKind kind, uint64_t n, uint64_t d);
// Ciphertext bits exchanged in one SLG run.
uint64_t CommBitsFormula(ModelKind kind, uint64_t n, uint64_t d,
                         uint64_t lambda_ct);

struct SlgExchange {
  GradientSharePair shares;
  HeOpCounts user_ops;
  HeOpCounts server_ops;
  uint64_t ciphertext_bits = 0;
};

// Runs the complete two-party exchange between the server and `user` over
// the bus, starting with the server sending E(theta).
SlgExchange RunSlgSession(SimBus& bus, uint64_t session, uint32_t user,
                          ModelKind kind, const AheKeyPair& server_keys,
                          std::span<const Ciphertext> enc_model,
                          const EncodedDataset& data,
                          std::span<const mpz_class> q, const Ring& ring,
                          Csprng& user_rng, Csprng& server_rng,
                          const LogSlgOptions& options = {});

}  // namespace fedreg::slg

#endif  // FEDREG_SLG_H_
