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

#include <algorithm>
#include <string>

#include "ahe_internal.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg::internal {

namespace {

constexpr unsigned kWindow = 8;

uint64_t Low64(const mpz_class& v) {
  uint64_t out = 0;
  const size_t limbs = mpz_size(v.get_mpz_t());
  if (limbs > 0) out = mpz_getlimbn(v.get_mpz_t(), 0);
  return out;
}

void MulMod(mpz_class& acc, const mpz_class& b, const mpz_class& m) {
  mpz_mul(acc.get_mpz_t(), acc.get_mpz_t(), b.get_mpz_t());
  mpz_tdiv_r(acc.get_mpz_t(), acc.get_mpz_t(), m.get_mpz_t());
}

}  // namespace

mpz_class RandomPrimeTopBits(unsigned bits, Csprng& rng, unsigned mod4) {
  for (;;) {
    mpz_class c = rng.Bits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    if (mod4 == 3) mpz_setbit(c.get_mpz_t(), 1);
    if (mpz_probab_prime_p(c.get_mpz_t(), 30) != 0) return c;
  }
}

JlPublicKey::JlPublicKey(unsigned k, unsigned modulus_bits, mpz_class n,
                         mpz_class y)
    : AhePublicKey(k, modulus_bits, modulus_bits, n),
      n_(std::move(n)),
      y_(std::move(y)) {
  if (mpz_sizeinbase(n_.get_mpz_t(), 2) != modulus_bits || y_ <= 1 ||
      y_ >= n_) {
    throw Error(ErrorCode::kMalformed, "inconsistent Joye-Libert public key");
  }
  mpz_ui_pow_ui(two_k_.get_mpz_t(), 2, k);
  const unsigned windows = (k + kWindow - 1) / kWindow;
  y_table_.resize(windows);
  mpz_class base = y_;
  for (unsigned j = 0; j < windows; ++j) {
    auto& row = y_table_[j];
    row.resize(size_t{1} << kWindow);
    row[0] = 1;
    for (size_t v = 1; v < row.size(); ++v) {
      row[v] = row[v - 1];
      MulMod(row[v], base, n_);
    }
    base = row.back();
    MulMod(base, row[1], n_);
  }
}

mpz_class JlPublicKey::PowY(const mpz_class& m) const {
  mpz_class acc = 1;
  for (unsigned j = 0; j < y_table_.size(); ++j) {
    mpz_class digit;
    mpz_fdiv_q_2exp(digit.get_mpz_t(), m.get_mpz_t(), j * kWindow);
    const unsigned long v = mpz_fdiv_ui(digit.get_mpz_t(), 1ul << kWindow);
    if (v != 0) MulMod(acc, y_table_[j][v], n_);
  }
  return acc;
}

mpz_class JlPublicKey::FreshBody(const mpz_class& m, Csprng& rng) const {
  mpz_class x;
  do {
    x = rng.Below(n_);
  } while (x <= 1);
  mpz_class blind;
  mpz_powm(blind.get_mpz_t(), x.get_mpz_t(), two_k_.get_mpz_t(),
           n_.get_mpz_t());
  mpz_class body = PowY(m);
  MulMod(body, blind, n_);
  return body;
}

void JlPublicKey::Serialize(ByteWriter& w) const {
  w.PutMpz(n_);
  w.PutMpz(y_);
}

JlSecretKey::JlSecretKey(std::shared_ptr<const JlPublicKey> pk, mpz_class p,
                         mpz_class q)
    : pk_(std::move(pk)), p_(std::move(p)), q_(std::move(q)) {
  const unsigned k = pk_->k();
  mpz_class pm1 = p_ - 1;
  if (mpz_scan1(pm1.get_mpz_t(), 0) < k) {
    throw Error(ErrorCode::kMalformed, "p - 1 is not divisible by 2^k");
  }
  mpz_fdiv_q_2exp(exponent_.get_mpz_t(), pm1.get_mpz_t(), k);

  mpz_class g;
  mpz_powm(g.get_mpz_t(), pk_->y().get_mpz_t(), exponent_.get_mpz_t(),
           p_.get_mpz_t());
  mpz_class ginv;
  if (mpz_invert(ginv.get_mpz_t(), g.get_mpz_t(), p_.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kMalformed, "degenerate Joye-Libert generator");
  }
  ginv_.resize(k);
  pow2_.resize(k + 1);
  ginv_[0] = ginv;
  for (unsigned i = 1; i < k; ++i) {
    ginv_[i] = ginv_[i - 1];
    MulMod(ginv_[i], ginv_[i - 1], p_);
  }
  for (unsigned i = 0; i <= k; ++i) mpz_ui_pow_ui(pow2_[i].get_mpz_t(), 2, i);

  window_ = std::min(k, kWindow);
  // h = g^{2^{k - w}} has order 2^w.
  mpz_class h;
  mpz_powm(h.get_mpz_t(), g.get_mpz_t(), pow2_[k - window_].get_mpz_t(),
           p_.get_mpz_t());
  const size_t entries = size_t{1} << window_;
  table_values_.resize(entries);
  table_.resize(entries);
  table_values_[0] = 1;
  for (size_t v = 0; v < entries; ++v) {
    if (v > 0) {
      table_values_[v] = table_values_[v - 1];
      MulMod(table_values_[v], h, p_);
    }
    table_[v] = {Low64(table_values_[v]), static_cast<uint32_t>(v)};
  }
  std::sort(table_.begin(), table_.end());
}

uint64_t JlSecretKey::BaseLookup(const mpz_class& value) const {
  const uint64_t key = Low64(value);
  auto it = std::lower_bound(table_.begin(), table_.end(),
                             std::make_pair(key, uint32_t{0}));
  for (; it != table_.end() && it->first == key; ++it) {
    if (table_values_[it->second] == value) return it->second;
  }
  throw Error(ErrorCode::kMalformed, "ciphertext does not decrypt");
}

mpz_class JlSecretKey::Solve(const mpz_class& value, unsigned bits) const {
  const unsigned k = pk_->k();
  if (bits <= window_) {
    // value = h^{m * 2^{w - bits}}
    return mpz_class(static_cast<unsigned long>(BaseLookup(value) >>
                                                (window_ - bits)));
  }
  const unsigned lo = bits / 2;
  const unsigned hi = bits - lo;
  mpz_class c1;
  mpz_powm(c1.get_mpz_t(), value.get_mpz_t(), pow2_[hi].get_mpz_t(),
           p_.get_mpz_t());
  mpz_class m_lo = Solve(c1, lo);
  mpz_class c2 = value;
  const unsigned base = k - bits;
  for (unsigned i = 0; i < lo; ++i) {
    if (mpz_tstbit(m_lo.get_mpz_t(), i)) MulMod(c2, ginv_[base + i], p_);
  }
  mpz_class m_hi = Solve(c2, hi);
  mpz_class out;
  mpz_mul_2exp(out.get_mpz_t(), m_hi.get_mpz_t(), lo);
  out += m_lo;
  return out;
}

mpz_class JlSecretKey::Decrypt(const Ciphertext& ct) const {
  pk_->Check(ct);
  mpz_class c;
  mpz_tdiv_r(c.get_mpz_t(), ct.body.get_mpz_t(), p_.get_mpz_t());
  if (sgn(c) == 0) throw Error(ErrorCode::kMalformed, "ciphertext not a unit");
  mpz_powm(c.get_mpz_t(), c.get_mpz_t(), exponent_.get_mpz_t(), p_.get_mpz_t());
  return Solve(c, pk_->k());
}

void JlSecretKey::Serialize(ByteWriter& w) const {
  w.PutMpz(p_);
  w.PutMpz(q_);
}

AheKeyPair JlKeygen(unsigned modulus_bits, unsigned k, Csprng& rng) {
  const unsigned p_bits = modulus_bits / 2;
  const unsigned q_bits = modulus_bits - p_bits;
  if (k + 64 > p_bits) {
    throw Error(ErrorCode::kParameter,
                "k too large for a " + std::to_string(modulus_bits) +
                    "-bit Joye-Libert modulus");
  }
  for (;;) {
    mpz_class p;
    for (;;) {
      mpz_class pp = rng.Bits(p_bits - k);
      mpz_setbit(pp.get_mpz_t(), p_bits - k - 1);
      mpz_setbit(pp.get_mpz_t(), p_bits - k - 2);
      mpz_mul_2exp(p.get_mpz_t(), pp.get_mpz_t(), k);
      p += 1;
      if (mpz_probab_prime_p(p.get_mpz_t(), 30) != 0) break;
    }
    mpz_class q = RandomPrimeTopBits(q_bits, rng, 3);
    mpz_class n = p * q;
    if (p == q || mpz_sizeinbase(n.get_mpz_t(), 2) != modulus_bits) continue;
    mpz_class y;
    for (;;) {
      y = rng.Below(n);
      if (y <= 1) continue;
      if (mpz_jacobi(y.get_mpz_t(), p.get_mpz_t()) == -1 &&
          mpz_jacobi(y.get_mpz_t(), q.get_mpz_t()) == -1) {
        break;
      }
    }
    auto pk = std::make_shared<JlPublicKey>(k, modulus_bits, n, y);
    auto sk = std::make_shared<JlSecretKey>(pk, p, q);
    return AheKeyPair{pk, sk};
  }
}

}  // namespace fedreg::internal
