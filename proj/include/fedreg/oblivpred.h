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

#ifndef FEDREG_OBLIVPRED_H_
#define FEDREG_OBLIVPRED_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fedreg/ahe.h"
#include "fedreg/bus.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/fixed_point.h"
#include "fedreg/slg.h"
#include "fedreg/types.h"

// Oblivious prediction. The user owns the homomorphic keypair; the server
// owns the model and only ever sees ciphertexts under the user's key.
namespace fedreg::oblivpred {

struct PredictRequest {
  uint64_t session = 0;
  Bytes public_key;
  std::vector<Ciphertext> enc_input;  // x_j at tau
};

struct MaskedOutput {
  uint64_t session = 0;
  Ciphertext enc_z;  // theta.x + r at 2 tau
};

struct AssistReply {
  uint64_t session = 0;
  Ciphertext enc_z2;
  Ciphertext enc_sig3z;
};

struct PredictResponse {
  uint64_t session = 0;
  Ciphertext enc_output;
};

class PredictionClient {
 public:
  PredictionClient(AheKeyPair keys, const FpConfig& fp,
                   const slg::SigmoidCubic& sigmoid, Csprng& rng);

  const AheKeyPair& keys() const { return keys_; }
  HeEvaluator& evaluator() { return ev_; }

  PredictRequest Request(std::span<const double> x, uint64_t session);
  // Decrypts z and returns E(z^2), E(sigma_3(z)).
  AssistReply Assist(const MaskedOutput& masked);
  double DecodeLinear(const PredictResponse& response);
  double DecodeLogistic(const PredictResponse& response);

 private:
  AheKeyPair keys_;
  FpConfig fp_;
  RingVector q_;
  HeEvaluator ev_;
};

struct ServerOptions {
  bool zero_mask = false;  // test hook: r = 0
};

class PredictionServer {
 public:
  PredictionServer(Model theta, const FpConfig& fp,
                   const slg::SigmoidCubic& sigmoid, Csprng& rng,
                   ServerOptions options = {});

  size_t features() const { return theta_.size() - 1; }
  const HeOpCounts& counts() const { return counts_; }
  void ResetCounts() { counts_ = {}; }

  PredictResponse Linear(const PredictRequest& request);
  MaskedOutput Mask(const PredictRequest& request);
  // Throws kSessionMismatch for an unknown session.
  PredictResponse Unmask(const AssistReply& reply);

 private:
  struct Pending {
    std::shared_ptr<const AhePublicKey> pk;
    mpz_class r;
    Ciphertext enc_y;
  };

  Ciphertext InnerProduct(HeEvaluator& ev, const PredictRequest& request);

  Model theta_;
  FpConfig fp_;
  RingVector theta_enc_;
  RingVector q_;
  Csprng& rng_;
  ServerOptions options_;
  HeOpCounts counts_;
  std::map<uint64_t, Pending> pending_;
};

struct PredictionResult {
  double value = 0.0;
  uint64_t user_bytes = 0;  // ciphertext bytes sent plus received by the user
};

PredictionResult LinPredict(PredictionClient& client, PredictionServer& server,
                            std::span<const double> x, uint64_t session = 1);
PredictionResult LogPredict(PredictionClient& client, PredictionServer& server,
                            std::span<const double> x, uint64_t session = 1);

// The same flows routed over the bus; user_bytes counts payload bytes.
PredictionResult LinPredictOverBus(SimBus& bus, uint32_t user,
                                   PredictionClient& client,
                                   PredictionServer& server,
                                   std::span<const double> x,
                                   uint64_t session);
PredictionResult LogPredictOverBus(SimBus& bus, uint32_t user,
                                   PredictionClient& client,
                                   PredictionServer& server,
                                   std::span<const double> x,
                                   uint64_t session);

// JSON wire format. Ciphertexts are base64 strings under "enc_input",
// "enc_output", "enc_z", "enc_z2" and "enc_sig3z".
std::string RequestToJson(const PredictRequest& r, const AhePublicKey& pk);
PredictRequest RequestFromJson(const std::string& text);
std::string MaskedToJson(const MaskedOutput& m, const AhePublicKey& pk);
MaskedOutput MaskedFromJson(const std::string& text, const AhePublicKey& pk);
std::string AssistToJson(const AssistReply& a, const AhePublicKey& pk);
AssistReply AssistFromJson(const std::string& text, const AhePublicKey& pk);
std::string ResponseToJson(const PredictResponse& r, const AhePublicKey& pk);
PredictResponse ResponseFromJson(const std::string& text,
                                 const AhePublicKey& pk);

}  // namespace fedreg::oblivpred

#endif  // FEDREG_OBLIVPRED_H_
