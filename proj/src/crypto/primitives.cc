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

#include "fedreg/crypto/primitives.h"

#include <memory>

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg::crypto {

namespace {

struct CipherCtx {
  CipherCtx() : ctx(EVP_CIPHER_CTX_new()) {}
  ~CipherCtx() { EVP_CIPHER_CTX_free(ctx); }
  EVP_CIPHER_CTX* ctx;
};

struct BnCtx {
  BnCtx() : ctx(BN_CTX_new()) {}
  ~BnCtx() { BN_CTX_free(ctx); }
  BN_CTX* ctx;
};

struct Bignum {
  Bignum() : bn(BN_new()) {}
  explicit Bignum(const mpz_class& v) : bn(nullptr) {
    Bytes raw = MpzToBytes(v);
    bn = BN_bin2bn(raw.data(), static_cast<int>(raw.size()), nullptr);
  }
  ~Bignum() { BN_clear_free(bn); }
  BIGNUM* bn;
};

struct Point {
  explicit Point(const EC_GROUP* g) : p(EC_POINT_new(g)) {}
  ~Point() { EC_POINT_free(p); }
  EC_POINT* p;
};

const EC_GROUP* Group() {
  static EC_GROUP* group = EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1);
  return group;
}

}  // namespace

Digest Sha256(std::span<const uint8_t> data) {
  Digest out;
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
             nullptr);
  return out;
}

Digest HashChain(const Digest& seed, uint64_t times) {
  Digest d = seed;
  for (uint64_t i = 0; i < times; ++i) d = Sha256(d);
  return d;
}

Key128 Truncate128(const Digest& d) {
  Key128 k;
  std::copy(d.begin(), d.begin() + 16, k.begin());
  return k;
}

Bytes AeadSeal(const Key128& key, const Nonce96& nonce,
               std::span<const uint8_t> plaintext,
               std::span<const uint8_t> aad) {
  CipherCtx c;
  int len = 0;
  Bytes out(plaintext.size() + 16);
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, key.data(),
                         nonce.data()) != 1 ||
      EVP_EncryptUpdate(c.ctx, nullptr, &len, aad.data(),
                        static_cast<int>(aad.size())) != 1 ||
      EVP_EncryptUpdate(c.ctx, out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(c.ctx, out.data() + len, &len) != 1 ||
      EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, 16,
                          out.data() + plaintext.size()) != 1) {
    throw Error(ErrorCode::kParameter, "AEAD seal failed");
  }
  return out;
}

Bytes AeadOpen(const Key128& key, const Nonce96& nonce,
               std::span<const uint8_t> sealed,
               std::span<const uint8_t> aad) {
  if (sealed.size() < 16) {
    throw Error(ErrorCode::kAuthentication, "sealed message too short");
  }
  const size_t n = sealed.size() - 16;
  CipherCtx c;
  int len = 0;
  Bytes out(n);
  Bytes tag(sealed.begin() + n, sealed.end());
  bool ok = EVP_DecryptInit_ex(c.ctx, EVP_aes_128_gcm(), nullptr, key.data(),
                               nonce.data()) == 1 &&
            EVP_DecryptUpdate(c.ctx, nullptr, &len, aad.data(),
                              static_cast<int>(aad.size())) == 1 &&
            EVP_DecryptUpdate(c.ctx, out.data(), &len, sealed.data(),
                              static_cast<int>(n)) == 1 &&
            EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, 16,
                                tag.data()) == 1 &&
            EVP_DecryptFinal_ex(c.ctx, out.data() + len, &len) == 1;
  if (!ok) throw Error(ErrorCode::kAuthentication, "AEAD tag mismatch");
  return out;
}

Bytes PrgExpand(const Key128& seed, size_t nbytes) {
  CipherCtx c;
  const uint8_t iv[16] = {0};
  Bytes out(nbytes, 0);
  int len = 0;
  if (EVP_EncryptInit_ex(c.ctx, EVP_aes_128_ctr(), nullptr, seed.data(), iv) !=
          1 ||
      EVP_EncryptUpdate(c.ctx, out.data(), &len, out.data(),
                        static_cast<int>(nbytes)) != 1) {
    throw Error(ErrorCode::kParameter, "PRG expansion failed");
  }
  return out;
}

RingVector PrgRing(const Key128& seed, const Ring& ring, size_t dim) {
  const size_t w = ring.byte_width();
  Bytes stream = PrgExpand(seed, w * dim);
  RingVector out(dim);
  for (size_t i = 0; i < dim; ++i) {
    out[i] = ring.Reduce(
        BytesToMpz(std::span<const uint8_t>(stream.data() + i * w, w)));
  }
  return out;
}

const mpz_class& P256Order() {
  static const mpz_class q(
      "ffffffff00000000ffffffffffffffffbce6faada7179e84f3b9cac2fc632551", 16);
  return q;
}

EcKeyPair EcGenerate(Csprng& rng) {
  EcKeyPair kp;
  kp.secret = rng.Below(P256Order() - 1) + 1;
  kp.public_key = EcPublicFromSecret(kp.secret);
  return kp;
}

Bytes EcPublicFromSecret(const mpz_class& secret) {
  BnCtx bctx;
  Bignum s(secret);
  Point p(Group());
  if (EC_POINT_mul(Group(), p.p, s.bn, nullptr, nullptr, bctx.ctx) != 1) {
    throw Error(ErrorCode::kParameter, "EC scalar multiplication failed");
  }
  Bytes out(33);
  if (EC_POINT_point2oct(Group(), p.p, POINT_CONVERSION_COMPRESSED,
                         out.data(), out.size(), bctx.ctx) != 33) {
    throw Error(ErrorCode::kParameter, "EC point encoding failed");
  }
  return out;
}

Digest EcAgree(const mpz_class& secret, std::span<const uint8_t> peer_public) {
  BnCtx bctx;
  Point peer(Group());
  if (EC_POINT_oct2point(Group(), peer.p, peer_public.data(),
                         peer_public.size(), bctx.ctx) != 1 ||
      EC_POINT_is_on_curve(Group(), peer.p, bctx.ctx) != 1 ||
      EC_POINT_is_at_infinity(Group(), peer.p)) {
    throw Error(ErrorCode::kMalformed, "invalid P-256 public key");
  }
  Bignum s(secret);
  Point shared(Group());
  Bignum x;
  if (EC_POINT_mul(Group(), shared.p, nullptr, peer.p, s.bn, bctx.ctx) != 1 ||
      EC_POINT_get_affine_coordinates(Group(), shared.p, x.bn, nullptr,
                                      bctx.ctx) != 1) {
    throw Error(ErrorCode::kMalformed, "EC key agreement failed");
  }
  uint8_t xb[32];
  BN_bn2binpad(x.bn, xb, 32);
  return Sha256(xb);
}

}  // namespace fedreg::crypto
