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

#ifndef FEDREG_SRC_AHE_INTERNAL_H_
#define FEDREG_SRC_AHE_INTERNAL_H_

#include <cstdint>
#include <memory>
#include <vector>

#include <gmpxx.h>

#include "fedreg/ahe.h"

namespace fedreg::internal {

class JlPublicKey final : public AhePublicKey {
 public:
  JlPublicKey(unsigned k, unsigned modulus_bits, mpz_class n, mpz_class y);
  AheBackend backend() const override { return AheBackend::kJoyeLibert; }
  const mpz_class& n() const { return n_; }
  const mpz_class& y() const { return y_; }
  void Serialize(ByteWriter& w) const override;

 protected:
  mpz_class FreshBody(const mpz_class& m, Csprng& rng) const override;

 private:
  mpz_class PowY(const mpz_class& m) const;

  mpz_class n_;
  mpz_class y_;
  mpz_class two_k_;
  // y^{v * 2^{8j}} for window j and digit v.
  std::vector<std::vector<mpz_class>> y_table_;
};

class JlSecretKey final : public AheSecretKey {
 public:
  JlSecretKey(std::shared_ptr<const JlPublicKey> pk, mpz_class p, mpz_class q);
  const AhePublicKey& public_key() const override { return *pk_; }
  mpz_class Decrypt(const Ciphertext& ct) const override;
  void Serialize(ByteWriter& w) const override;

 private:
  // Returns m in [0, 2^bits) with value = G^m, G = g^{2^{k - bits}}.
  uint64_t BaseLookup(const mpz_class& value) const;
  mpz_class Solve(const mpz_class& value, unsigned bits) const;

  std::shared_ptr<const JlPublicKey> pk_;
  mpz_class p_;
  mpz_class q_;
  mpz_class exponent_;          // (p - 1) / 2^k
  std::vector<mpz_class> ginv_;  // g^{-2^i} mod p
  std::vector<mpz_class> pow2_;  // 2^i
  unsigned window_;
  std::vector<std::pair<uint64_t, uint32_t>> table_;
  std::vector<mpz_class> table_values_;
};

class PaillierPublicKey final : public AhePublicKey {
 public:
  PaillierPublicKey(unsigned k, unsigned modulus_bits, mpz_class n);
  AheBackend backend() const override { return AheBackend::kPaillier; }
  const mpz_class& n() const { return n_; }
  void Serialize(ByteWriter& w) const override;

 protected:
  mpz_class FreshBody(const mpz_class& m, Csprng& rng) const override;

 private:
  mpz_class n_;
  mpz_class n2_;
};

class PaillierSecretKey final : public AheSecretKey {
 public:
  PaillierSecretKey(std::shared_ptr<const PaillierPublicKey> pk, mpz_class p,
                    mpz_class q);
  const AhePublicKey& public_key() const override { return *pk_; }
  mpz_class Decrypt(const Ciphertext& ct) const override;
  void Serialize(ByteWriter& w) const override;

 private:
  std::shared_ptr<const PaillierPublicKey> pk_;
  mpz_class p_, q_, p2_, q2_, hp_, hq_, p_inv_q_, two_k_;
};

AheKeyPair JlKeygen(unsigned modulus_bits, unsigned k, Csprng& rng);
AheKeyPair PaillierKeygen(unsigned modulus_bits, unsigned k, Csprng& rng);

// Random prime of exactly `bits` bits with the two top bits set.
mpz_class RandomPrimeTopBits(unsigned bits, Csprng& rng, unsigned mod4 = 0);

}  // namespace fedreg::internal

#endif  // FEDREG_SRC_AHE_INTERNAL_H_
