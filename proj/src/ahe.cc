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

#include "fedreg/ahe.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "ahe_internal.h"
#include "fedreg/crypto/primitives.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg {

namespace {

constexpr char kMagic[4] = {'F', 'R', 'K', '1'};

uint64_t KeyIdOf(const mpz_class& modulus) {
  Bytes raw = MpzToBytes(modulus);
  crypto::Digest d = crypto::Sha256(raw);
  uint64_t id = 0;
  for (int i = 0; i < 8; ++i) id = (id << 8) | d[i];
  return id;
}

}  // namespace

const char* AheBackendName(AheBackend backend) {
  return backend == AheBackend::kPaillier ? "paillier" : "joye-libert";
}

AheBackend ParseAheBackend(std::string_view name) {
  if (name == "jl" || name == "joye-libert") return AheBackend::kJoyeLibert;
  if (name == "paillier") return AheBackend::kPaillier;
  throw Error(ErrorCode::kConfig,
              "unknown AHE backend '" + std::string(name) + "'");
}

AheBackend AheBackendFromEnv() {
  const char* v = std::getenv("FEDREG_AHE_BACKEND");
  if (v == nullptr || *v == '\0') return AheBackend::kJoyeLibert;
  return ParseAheBackend(v);
}

AhePublicKey::AhePublicKey(unsigned k, unsigned modulus_bits,
                           unsigned ciphertext_bits, mpz_class ct_modulus)
    : k_(k),
      modulus_bits_(modulus_bits),
      ciphertext_bits_(ciphertext_bits),
      ct_modulus_(std::move(ct_modulus)),
      key_id_(KeyIdOf(ct_modulus_)) {
  mpz_ui_pow_ui(message_modulus_.get_mpz_t(), 2, k);
}

void AhePublicKey::Check(const Ciphertext& ct) const {
  if (ct.key_id != key_id_) {
    throw Error(ErrorCode::kKeyMismatch,
                "ciphertext was produced under a different key");
  }
  if (sgn(ct.body) <= 0 || ct.body >= ct_modulus_) {
    throw Error(ErrorCode::kMalformed, "ciphertext body out of range");
  }
}

Ciphertext AhePublicKey::Encrypt(const mpz_class& m, Csprng& rng) const {
  if (sgn(m) < 0 || m >= message_modulus_) {
    throw Error(ErrorCode::kRange, "plaintext outside Z_{2^k}");
  }
  return Ciphertext{FreshBody(m, rng), ciphertext_bits_, key_id_};
}

Ciphertext AhePublicKey::EncryptAdd(const Ciphertext& ct, const mpz_class& m,
                                    Csprng& rng) const {
  Check(ct);
  Ciphertext fresh = Encrypt(m, rng);
  mpz_class body = ct.body * fresh.body;
  mpz_mod(body.get_mpz_t(), body.get_mpz_t(), ct_modulus_.get_mpz_t());
  return Ciphertext{std::move(body), ciphertext_bits_, key_id_};
}

Ciphertext AhePublicKey::Add(const Ciphertext& a, const Ciphertext& b) const {
  Check(a);
  Check(b);
  mpz_class body = a.body * b.body;
  mpz_mod(body.get_mpz_t(), body.get_mpz_t(), ct_modulus_.get_mpz_t());
  return Ciphertext{std::move(body), ciphertext_bits_, key_id_};
}

Ciphertext AhePublicKey::ScalarMul(const Ciphertext& ct,
                                   const mpz_class& z) const {
  Check(ct);
  mpz_class e;
  mpz_fdiv_r_2exp(e.get_mpz_t(), z.get_mpz_t(), k_);
  mpz_class body;
  mpz_powm(body.get_mpz_t(), ct.body.get_mpz_t(), e.get_mpz_t(),
           ct_modulus_.get_mpz_t());
  return Ciphertext{std::move(body), ciphertext_bits_, key_id_};
}

Bytes AhePublicKey::SerializeCiphertext(const Ciphertext& ct) const {
  Check(ct);
  return MpzToBytes(ct.body, ciphertext_bytes());
}

Ciphertext AhePublicKey::ParseCiphertext(std::span<const uint8_t> bytes) const {
  if (bytes.size() != ciphertext_bytes()) {
    throw Error(ErrorCode::kMalformed, "ciphertext has wrong length");
  }
  Ciphertext ct{BytesToMpz(bytes), ciphertext_bits_, key_id_};
  Check(ct);
  return ct;
}

AheKeyPair AheKeygen(AheBackend backend, unsigned modulus_bits, unsigned k,
                     Csprng& rng) {
  if (modulus_bits != 2048 && modulus_bits != 3072) {
    throw Error(ErrorCode::kParameter,
                "modulus must be 2048 or 3072 bits, got " +
                    std::to_string(modulus_bits));
  }
  if (k < 2 || k > 512) {
    throw Error(ErrorCode::kParameter, "k must be in [2, 512]");
  }
  return backend == AheBackend::kPaillier
             ? internal::PaillierKeygen(modulus_bits, k, rng)
             : internal::JlKeygen(modulus_bits, k, rng);
}

AheKeyPair AheKeygen(AheBackend backend, unsigned modulus_bits, unsigned k,
                     uint64_t seed) {
  Csprng rng(seed, "ahe/keygen");
  return AheKeygen(backend, modulus_bits, k, rng);
}

namespace {

void WriteHeader(ByteWriter& w, const AhePublicKey& pk, bool has_secret) {
  w.PutRaw(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(kMagic), 4));
  w.PutU8(static_cast<uint8_t>(pk.backend()));
  w.PutU8(has_secret ? 1 : 0);
  w.PutU32(pk.k());
  w.PutU32(pk.modulus_bits());
}

}  // namespace

Bytes SerializePublicKey(const AhePublicKey& pk) {
  ByteWriter w;
  WriteHeader(w, pk, false);
  pk.Serialize(w);
  return std::move(w).bytes();
}

Bytes SerializeKeyPair(const AheKeyPair& kp) {
  ByteWriter w;
  WriteHeader(w, *kp.pk, kp.sk != nullptr);
  kp.pk->Serialize(w);
  if (kp.sk) kp.sk->Serialize(w);
  return std::move(w).bytes();
}

AheKeyPair DeserializeKeyPair(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.GetRaw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kMalformed, "not a fedreg key blob");
  }
  const uint8_t backend = r.GetU8();
  const bool has_secret = r.GetU8() != 0;
  const unsigned k = r.GetU32();
  const unsigned modulus_bits = r.GetU32();
  if (k < 2 || k > 512 || (modulus_bits != 2048 && modulus_bits != 3072)) {
    throw Error(ErrorCode::kMalformed, "key header out of range");
  }
  AheKeyPair kp;
  if (backend == static_cast<uint8_t>(AheBackend::kJoyeLibert)) {
    mpz_class n = r.GetMpz();
    mpz_class y = r.GetMpz();
    auto pk = std::make_shared<internal::JlPublicKey>(k, modulus_bits, n, y);
    kp.pk = pk;
    if (has_secret) {
      mpz_class p = r.GetMpz();
      mpz_class q = r.GetMpz();
      if (p * q != n) throw Error(ErrorCode::kMalformed, "p*q != N");
      kp.sk = std::make_shared<internal::JlSecretKey>(pk, p, q);
    }
  } else if (backend == static_cast<uint8_t>(AheBackend::kPaillier)) {
    mpz_class n = r.GetMpz();
    auto pk = std::make_shared<internal::PaillierPublicKey>(k, modulus_bits, n);
    kp.pk = pk;
    if (has_secret) {
      mpz_class p = r.GetMpz();
      mpz_class q = r.GetMpz();
      if (p * q != n) throw Error(ErrorCode::kMalformed, "p*q != N");
      kp.sk = std::make_shared<internal::PaillierSecretKey>(pk, p, q);
    }
  } else {
    throw Error(ErrorCode::kMalformed, "unknown backend tag");
  }
  if (!r.done()) throw Error(ErrorCode::kMalformed, "trailing key bytes");
  return kp;
}

std::shared_ptr<const AhePublicKey> DeserializePublicKey(
    std::span<const uint8_t> bytes) {
  return DeserializeKeyPair(bytes).pk;
}

Bytes PackCiphertexts(const AhePublicKey& pk, std::span<const Ciphertext> cts) {
  Bytes out;
  out.reserve(cts.size() * pk.ciphertext_bytes());
  for (const auto& ct : cts) {
    Bytes one = pk.SerializeCiphertext(ct);
    out.insert(out.end(), one.begin(), one.end());
  }
  return out;
}

std::vector<Ciphertext> UnpackCiphertexts(const AhePublicKey& pk,
                                          std::span<const uint8_t> bytes) {
  const size_t w = pk.ciphertext_bytes();
  if (bytes.size() % w != 0) {
    throw Error(ErrorCode::kMalformed, "ciphertext vector has ragged length");
  }
  std::vector<Ciphertext> out;
  out.reserve(bytes.size() / w);
  for (size_t off = 0; off < bytes.size(); off += w) {
    out.push_back(pk.ParseCiphertext(bytes.subspan(off, w)));
  }
  return out;
}

HeOpCounts& HeOpCounts::operator+=(const HeOpCounts& o) {
  ct_mul += o.ct_mul;
  const_mul += o.const_mul;
  enc += o.enc;
  dec += o.dec;
  return *this;
}

Ciphertext HeEvaluator::Encrypt(const mpz_class& m) {
  ++counts_.enc;
  return pk_.Encrypt(m, rng_);
}

std::vector<Ciphertext> HeEvaluator::Encrypt(std::span<const mpz_class> ms) {
  std::vector<Ciphertext> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(Encrypt(m));
  return out;
}

Ciphertext HeEvaluator::EncryptAdd(const Ciphertext& ct, const mpz_class& m) {
  ++counts_.enc;
  return pk_.EncryptAdd(ct, m, rng_);
}

Ciphertext HeEvaluator::Add(const Ciphertext& a, const Ciphertext& b) {
  ++counts_.ct_mul;
  return pk_.Add(a, b);
}

Ciphertext HeEvaluator::ScalarMul(const Ciphertext& ct, const mpz_class& z) {
  ++counts_.const_mul;
  return pk_.ScalarMul(ct, z);
}

mpz_class HeEvaluator::Decrypt(const AheSecretKey& sk, const Ciphertext& ct) {
  ++counts_.dec;
  return sk.Decrypt(ct);
}

}  // namespace fedreg
