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

#include "fedreg/crypto/rng.h"

#include <cstring>
#include <string>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "fedreg/error.h"

namespace fedreg {

namespace {

constexpr size_t kBlock = 4096;

std::array<uint8_t, 32> KeyFrom(std::span<const uint8_t> prefix,
                                std::string_view label) {
  Bytes msg(prefix.begin(), prefix.end());
  msg.insert(msg.end(), label.begin(), label.end());
  std::array<uint8_t, 32> key;
  unsigned int len = 0;
  EVP_Digest(msg.data(), msg.size(), key.data(), &len, EVP_sha256(), nullptr);
  return key;
}

}  // namespace

struct Csprng::Impl {
  std::array<uint8_t, 32> key;
  EVP_CIPHER_CTX* ctx = nullptr;
  std::array<uint8_t, kBlock> buf;
  size_t pos = kBlock;

  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Csprng::Csprng(const std::array<uint8_t, 32>& key)
    : impl_(std::make_unique<Impl>()) {
  impl_->key = key;
  impl_->ctx = EVP_CIPHER_CTX_new();
  const uint8_t iv[16] = {0};
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_aes_256_ctr(), nullptr, key.data(),
                         iv) != 1) {
    throw Error(ErrorCode::kParameter, "AES-CTR initialisation failed");
  }
}

Csprng::Csprng() : Csprng([] {
  std::array<uint8_t, 32> key;
  if (RAND_bytes(key.data(), key.size()) != 1) {
    throw Error(ErrorCode::kParameter, "system randomness unavailable");
  }
  return key;
}()) {}

Csprng::Csprng(uint64_t seed, std::string_view label)
    : Csprng([&] {
        uint8_t prefix[8];
        for (int i = 0; i < 8; ++i) prefix[i] = uint8_t(seed >> (56 - 8 * i));
        return KeyFrom(prefix, label);
      }()) {}

Csprng::~Csprng() = default;
Csprng::Csprng(Csprng&&) noexcept = default;
Csprng& Csprng::operator=(Csprng&&) noexcept = default;

void Csprng::Refill() {
  static const std::array<uint8_t, kBlock> zeros{};
  int len = 0;
  EVP_EncryptUpdate(impl_->ctx, impl_->buf.data(), &len, zeros.data(), kBlock);
  impl_->pos = 0;
}

void Csprng::Fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (impl_->pos == kBlock) Refill();
    size_t n = std::min(out.size() - done, kBlock - impl_->pos);
    std::memcpy(out.data() + done, impl_->buf.data() + impl_->pos, n);
    impl_->pos += n;
    done += n;
  }
}

Bytes Csprng::RandomBytes(size_t n) {
  Bytes out(n);
  Fill(out);
  return out;
}

Csprng::result_type Csprng::operator()() {
  uint8_t b[8];
  Fill(b);
  uint64_t v = 0;
  for (uint8_t x : b) v = (v << 8) | x;
  return v;
}

mpz_class Csprng::Bits(unsigned bits) {
  if (bits == 0) return 0;
  Bytes raw = RandomBytes((bits + 7) / 8);
  mpz_class v = BytesToMpz(raw);
  mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);
  return v;
}

mpz_class Csprng::Below(const mpz_class& bound) {
  if (sgn(bound) <= 0) {
    throw Error(ErrorCode::kParameter, "random bound must be positive");
  }
  const unsigned bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  for (;;) {
    mpz_class v = Bits(bits);
    if (v < bound) return v;
  }
}

uint64_t Csprng::Below(uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::kParameter, "random bound must be positive");
  }
  const uint64_t limit = max() - (max() % bound + 1) % bound;
  for (;;) {
    uint64_t v = (*this)();
    if (v <= limit) return v % bound;
  }
}

double Csprng::Uniform01() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

Csprng Csprng::Fork(std::string_view label) const {
  return Csprng(KeyFrom(impl_->key, std::string("fork/") + std::string(label)));
}

}  // namespace fedreg
