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

#ifndef FEDREG_SECRET_SHARE_H_
#define FEDREG_SECRET_SHARE_H_

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "fedreg/bytes.h"

namespace fedreg {

class Csprng;

namespace shamir {

// Integers mod a prime q.
class PrimeField {
 public:
  explicit PrimeField(mpz_class q);

  const mpz_class& order() const { return q_; }
  mpz_class Reduce(const mpz_class& v) const;
  mpz_class Inverse(const mpz_class& v) const;
  mpz_class Random(Csprng& rng) const;

 private:
  mpz_class q_;
};

// Integers mod the P-256 group order.
const PrimeField& DefaultField();

struct Share {
  uint32_t index = 0;
  mpz_class value;
};

// Shares at points 1..m.
std::vector<Share> Split(const mpz_class& secret, unsigned t, unsigned m,
                         Csprng& rng, const PrimeField& field = DefaultField());
// Shares at the given non-zero, distinct points.
std::vector<Share> SplitAt(const mpz_class& secret, unsigned t,
                           std::span<const uint32_t> points, Csprng& rng,
                           const PrimeField& field = DefaultField());

// Lagrange interpolation at zero over the first t shares. Throws
// kInsufficientShares or kDuplicateIndex.
mpz_class Reconstruct(std::span<const Share> shares, unsigned t,
                      const PrimeField& field = DefaultField());

// Coefficients of the unique polynomial of degree < shares.size() through
// the points, lowest degree first.
std::vector<mpz_class> Interpolate(std::span<const Share> shares,
                                   const PrimeField& field = DefaultField());

// index: 4-byte big-endian, value: 32-byte big-endian.
constexpr size_t kShareWireBytes = 36;
Bytes EncodeShare(const Share& share);
Share DecodeShare(std::span<const uint8_t> bytes);

}  // namespace shamir
}  // namespace fedreg

#endif  // FEDREG_SECRET_SHARE_H_
