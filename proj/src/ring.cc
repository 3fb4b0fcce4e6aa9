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

#include "fedreg/ring.h"

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg {

Ring::Ring(unsigned bits) : bits_(bits) {
  if (bits < 2 || bits > 1024) {
    throw Error(ErrorCode::kParameter, "ring width must be in [2, 1024]");
  }
  mpz_ui_pow_ui(modulus_.get_mpz_t(), 2, bits);
  mpz_ui_pow_ui(half_.get_mpz_t(), 2, bits - 1);
}

mpz_class Ring::Reduce(const mpz_class& v) const {
  mpz_class out;
  mpz_fdiv_r_2exp(out.get_mpz_t(), v.get_mpz_t(), bits_);
  return out;
}

mpz_class Ring::Add(const mpz_class& a, const mpz_class& b) const {
  return Reduce(a + b);
}

mpz_class Ring::Sub(const mpz_class& a, const mpz_class& b) const {
  return Reduce(a - b);
}

mpz_class Ring::Mul(const mpz_class& a, const mpz_class& b) const {
  return Reduce(a * b);
}

mpz_class Ring::Neg(const mpz_class& a) const { return Reduce(-a); }

bool Ring::Contains(const mpz_class& v) const {
  return sgn(v) >= 0 && v < modulus_;
}

mpz_class Ring::ToSigned(const mpz_class& v) const {
  mpz_class r = Reduce(v);
  if (r >= half_) r -= modulus_;
  return r;
}

mpz_class Ring::Random(Csprng& rng) const { return rng.Bits(bits_); }

RingVector Ring::AddVec(std::span<const mpz_class> a,
                        std::span<const mpz_class> b) const {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimension, "ring vector sizes differ");
  }
  RingVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = Add(a[i], b[i]);
  return out;
}

RingVector Ring::SubVec(std::span<const mpz_class> a,
                        std::span<const mpz_class> b) const {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimension, "ring vector sizes differ");
  }
  RingVector out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = Sub(a[i], b[i]);
  return out;
}

}  // namespace fedreg
