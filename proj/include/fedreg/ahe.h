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

#ifndef FEDREG_AHE_H_
#define FEDREG_AHE_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "fedreg/bytes.h"

namespace fedreg {

class Csprng;

enum class AheBackend : uint8_t { kJoyeLibert = 1, kPaillier = 2 };

const char* AheBackendName(AheBackend backend);
// "jl" / "joye-libert" or "paillier".
AheBackend ParseAheBackend(std::string_view name);
// FEDREG_AHE_BACKEND, defaulting to Joye-Libert.
AheBackend AheBackendFromEnv();

struct Ciphertext {
  mpz_class body;
  unsigned bits = 0;     // lambda_ct
  uint64_t key_id = 0;
};

// Public half of an additively homomorphic scheme with message space
// Z_{2^k}. Addition of plaintexts is ciphertext multiplication; scalar
// multiplication is exponentiation.
class AhePublicKey {
 public:
  virtual ~AhePublicKey() = default;

  virtual AheBackend backend() const = 0;
  unsigned k() const { return k_; }
  unsigned modulus_bits() const { return modulus_bits_; }
  unsigned ciphertext_bits() const { return ciphertext_bits_; }
  size_t ciphertext_bytes() const { return ciphertext_bits_ / 8; }
  const mpz_class& ciphertext_modulus() const { return ct_modulus_; }
  uint64_t key_id() const { return key_id_; }

  // Throws kRange unless m < 2^k.
  Ciphertext Encrypt(const mpz_class& m, Csprng& rng) const;
  // Folds a fresh encryption of m into ct: E(x) -> E(x + m).
  Ciphertext EncryptAdd(const Ciphertext& ct, const mpz_class& m,
                        Csprng& rng) const;
  Ciphertext Add(const Ciphertext& a, const Ciphertext& b) const;
  // z is taken mod 2^k; ring-negative z subtracts.
  Ciphertext ScalarMul(const Ciphertext& ct, const mpz_class& z) const;

  // Throws kKeyMismatch or kMalformed.
  void Check(const Ciphertext& ct) const;
  Bytes SerializeCiphertext(const Ciphertext& ct) const;
  Ciphertext ParseCiphertext(std::span<const uint8_t> bytes) const;

  virtual void Serialize(ByteWriter& w) const = 0;

 protected:
  AhePublicKey(unsigned k, unsigned modulus_bits, unsigned ciphertext_bits,
               mpz_class ct_modulus);
  // y^m * (fresh randomizer), not reduced by the range check.
  virtual mpz_class FreshBody(const mpz_class& m, Csprng& rng) const = 0;

 private:
  unsigned k_;
  unsigned modulus_bits_;
  unsigned ciphertext_bits_;
  mpz_class ct_modulus_;
  mpz_class message_modulus_;
  uint64_t key_id_;
};

class AheSecretKey {
 public:
  virtual ~AheSecretKey() = default;
  virtual const AhePublicKey& public_key() const = 0;
  // Result is reduced mod 2^k.
  virtual mpz_class Decrypt(const Ciphertext& ct) const = 0;
  virtual void Serialize(ByteWriter& w) const = 0;
};

struct AheKeyPair {
  std::shared_ptr<const AhePublicKey> pk;
  std::shared_ptr<const AheSecretKey> sk;
};

// modulus_bits must be 2048 or 3072 and k at most 512.
AheKeyPair AheKeygen(AheBackend backend, unsigned modulus_bits, unsigned k,
                     Csprng& rng);
AheKeyPair AheKeygen(AheBackend backend, unsigned modulus_bits, unsigned k,
                     uint64_t seed);

// Layout: "FRK1" | backend u8 | has_secret u8 | k u32 | modulus_bits u32 |
// fields, each a u32 length followed by a big-endian magnitude.
// Joye-Libert fields: N, y [, p, q]. Paillier fields: N [, p, q].
Bytes SerializePublicKey(const AhePublicKey& pk);
Bytes SerializeKeyPair(const AheKeyPair& kp);
std::shared_ptr<const AhePublicKey> DeserializePublicKey(
    std::span<const uint8_t> bytes);
// sk is null when the blob holds a public key only.
AheKeyPair DeserializeKeyPair(std::span<const uint8_t> bytes);

// Fixed-width concatenation of ciphertexts.
Bytes PackCiphertexts(const AhePublicKey& pk, std::span<const Ciphertext> cts);
std::vector<Ciphertext> UnpackCiphertexts(const AhePublicKey& pk,
                                          std::span<const uint8_t> bytes);

struct HeOpCounts {
  uint64_t ct_mul = 0;
  uint64_t const_mul = 0;
  uint64_t enc = 0;
  uint64_t dec = 0;

  HeOpCounts& operator+=(const HeOpCounts& o);
  bool operator==(const HeOpCounts&) const = default;
};

// Routes every homomorphic operation through a counter.
class HeEvaluator {
 public:
  HeEvaluator(const AhePublicKey& pk, Csprng& rng) : pk_(pk), rng_(rng) {}

  const AhePublicKey& public_key() const { return pk_; }
  Csprng& rng() { return rng_; }

  Ciphertext Encrypt(const mpz_class& m);
  std::vector<Ciphertext> Encrypt(std::span<const mpz_class> ms);
  Ciphertext EncryptAdd(const Ciphertext& ct, const mpz_class& m);
  Ciphertext Add(const Ciphertext& a, const Ciphertext& b);
  Ciphertext ScalarMul(const Ciphertext& ct, const mpz_class& z);
  mpz_class Decrypt(const AheSecretKey& sk, const Ciphertext& ct);

  const HeOpCounts& counts() const { return counts_; }
  void ResetCounts() { counts_ = {}; }

 private:
  const AhePublicKey& pk_;
  Csprng& rng_;
  HeOpCounts counts_;
};

}  // namespace fedreg

#endif  // FEDREG_AHE_H_
