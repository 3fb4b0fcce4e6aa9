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

#ifndef FEDREG_RING_H_
#define FEDREG_RING_H_

#include <cstddef>
#include <span>
#include <vector>

#include <gmpxx.h>

namespace fedreg {

class Csprng;

// Arithmetic in Z_{2^k}. Elements are plain mpz_class values kept in
// [0, 2^k); the upper half [2^{k-1}, 2^k) stands for negative numbers.
class Ring {
 public:
  explicit Ring(unsigned bits);

  unsigned bits() const { return bits_; }
  size_t byte_width() const { return (bits_ + 7) / 8; }
  const mpz_class& modulus() const { return modulus_; }

  // Reduces any integer (including negatives) into [0, 2^k).
  mpz_class Reduce(const mpz_class& v) const;
  mpz_class Add(const mpz_class& a, const mpz_class& b) const;
  mpz_class Sub(const mpz_class& a, const mpz_class& b) const;
  mpz_class Mul(const mpz_class& a, const mpz_class& b) const;
  mpz_class Neg(const mpz_class& a) const;

  bool Contains(const mpz_class& v) const;
  bool IsNegative(const mpz_class& v) const { return v >= half_; }
  // Two-halves interpretation as a signed integer in [-2^{k-1}, 2^{k-1}).
  mpz_class ToSigned(const mpz_class& v) const;

  mpz_class Random(Csprng& rng) const;

  std::vector<mpz_class> AddVec(std::span<const mpz_class> a,
                                std::span<const mpz_class> b) const;
  std::vector<mpz_class> SubVec(std::span<const mpz_class> a,
                                std::span<const mpz_class> b) const;

 private:
  unsigned bits_;
  mpz_class modulus_;
  mpz_class half_;
};

using RingVector = std::vector<mpz_class>;

}  // namespace fedreg

#endif  // FEDREG_RING_H_
