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

#include <string>

#include "ahe_internal.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg::internal {

namespace {

// L_p(x) = (x - 1) / p, then times h mod p.
mpz_class HalfDecrypt(const mpz_class& c, const mpz_class& p,
                      const mpz_class& p2, const mpz_class& h) {
  mpz_class x;
  mpz_class e = p - 1;
  mpz_powm(x.get_mpz_t(), c.get_mpz_t(), e.get_mpz_t(), p2.get_mpz_t());
  x -= 1;
  mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
  x *= h;
  mpz_mod(x.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
  return x;
}

mpz_class HFactor(const mpz_class& n, const mpz_class& p, const mpz_class& p2) {
  mpz_class g = n + 1;
  mpz_class x;
  mpz_class e = p - 1;
  mpz_powm(x.get_mpz_t(), g.get_mpz_t(), e.get_mpz_t(), p2.get_mpz_t());
  x -= 1;
  mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
  mpz_class inv;
  if (mpz_invert(inv.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kMalformed, "degenerate Paillier key");
  }
  return inv;
}

}  // namespace

PaillierPublicKey::PaillierPublicKey(unsigned k, unsigned modulus_bits,
                                     mpz_class n)
    : AhePublicKey(k, modulus_bits, 2 * modulus_bits, n * n),
      n_(std::move(n)),
      n2_(n_ * n_) {
  if (mpz_sizeinbase(n_.get_mpz_t(), 2) != modulus_bits ||
      k + 2 > modulus_bits) {
    throw Error(ErrorCode::kMalformed, "inconsistent Paillier public key");
  }
}

mpz_class PaillierPublicKey::FreshBody(const mpz_class& m, Csprng& rng) const {
  mpz_class r;
  do {
    r = rng.Below(n_);
  } while (r <= 1);
  mpz_class blind;
  mpz_powm(blind.get_mpz_t(), r.get_mpz_t(), n_.get_mpz_t(), n2_.get_mpz_t());
  mpz_class body = m * n_ + 1;
  body *= blind;
  mpz_mod(body.get_mpz_t(), body.get_mpz_t(), n2_.get_mpz_t());
  return body;
}

void PaillierPublicKey::Serialize(ByteWriter& w) const { w.PutMpz(n_); }

PaillierSecretKey::PaillierSecretKey(std::shared_ptr<const PaillierPublicKey> pk,
                                     mpz_class p, mpz_class q)
    : pk_(std::move(pk)), p_(std::move(p)), q_(std::move(q)) {
  p2_ = p_ * p_;
  q2_ = q_ * q_;
  hp_ = HFactor(pk_->n(), p_, p2_);
  hq_ = HFactor(pk_->n(), q_, q2_);
  if (mpz_invert(p_inv_q_.get_mpz_t(), p_.get_mpz_t(), q_.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kMalformed, "p not invertible mod q");
  }
  mpz_ui_pow_ui(two_k_.get_mpz_t(), 2, pk_->k());
}

mpz_class PaillierSecretKey::Decrypt(const Ciphertext& ct) const {
  pk_->Check(ct);
  mpz_class mp = HalfDecrypt(ct.body, p_, p2_, hp_);
  mpz_class mq = HalfDecrypt(ct.body, q_, q2_, hq_);
  mpz_class t = (mq - mp) * p_inv_q_;
  mpz_mod(t.get_mpz_t(), t.get_mpz_t(), q_.get_mpz_t());
  mpz_class m = mp + p_ * t;
  mpz_fdiv_r_2exp(m.get_mpz_t(), m.get_mpz_t(), pk_->k());
  return m;
}

void PaillierSecretKey::Serialize(ByteWriter& w) const {
  w.PutMpz(p_);
  w.PutMpz(q_);
}

AheKeyPair PaillierKeygen(unsigned modulus_bits, unsigned k, Csprng& rng) {
  const unsigned half = modulus_bits / 2;
  for (;;) {
    mpz_class p = RandomPrimeTopBits(half, rng);
    mpz_class q = RandomPrimeTopBits(modulus_bits - half, rng);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != modulus_bits) continue;
    mpz_class phi = (p - 1) * (q - 1);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    auto pk = std::make_shared<PaillierPublicKey>(k, modulus_bits, n);
    auto sk = std::make_shared<PaillierSecretKey>(pk, p, q);
    return AheKeyPair{pk, sk};
  }
}

}  // namespace fedreg::internal
