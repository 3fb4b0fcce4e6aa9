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

#ifndef FEDREG_CRYPTO_RNG_H_
#define FEDREG_CRYPTO_RNG_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string_view>

#include <gmpxx.h>

#include "fedreg/bytes.h"

namespace fedreg {

// AES-256-CTR keystream generator. Seeded instances are keyed by
// SHA-256(seed || label) so that independently named streams never overlap;
// the default constructor draws its key from the operating system.
class Csprng {
 public:
  using result_type = uint64_t;

  Csprng();
  Csprng(uint64_t seed, std::string_view label);
  ~Csprng();
  Csprng(Csprng&&) noexcept;
  Csprng& operator=(Csprng&&) noexcept;
  Csprng(const Csprng&) = delete;
  Csprng& operator=(const Csprng&) = delete;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  void Fill(std::span<uint8_t> out);
  Bytes RandomBytes(size_t n);
  // Uniform in [0, 2^bits).
  mpz_class Bits(unsigned bits);
  // Uniform in [0, bound), bound > 0.
  mpz_class Below(const mpz_class& bound);
  uint64_t Below(uint64_t bound);
  // Uniform double in [0, 1).
  double Uniform01();

  // Deterministic child stream.
  Csprng Fork(std::string_view label) const;

 private:
  explicit Csprng(const std::array<uint8_t, 32>& key);
  void Refill();

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fedreg

#endif  // FEDREG_CRYPTO_RNG_H_
