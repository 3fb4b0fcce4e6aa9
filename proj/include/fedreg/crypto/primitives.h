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

#ifndef FEDREG_CRYPTO_PRIMITIVES_H_
#define FEDREG_CRYPTO_PRIMITIVES_H_

#include <array>
#include <cstdint>
#include <span>

#include <gmpxx.h>

#include "fedreg/bytes.h"
#include "fedreg/ring.h"

namespace fedreg {

class Csprng;

namespace crypto {

using Digest = std::array<uint8_t, 32>;
using Key128 = std::array<uint8_t, 16>;
using Nonce96 = std::array<uint8_t, 12>;

Digest Sha256(std::span<const uint8_t> data);
// H applied `times` times, starting from `seed`.
Digest HashChain(const Digest& seed, uint64_t times);
Key128 Truncate128(const Digest& d);

// AES-128-GCM. The sealed form is ciphertext || 16-byte tag.
Bytes AeadSeal(const Key128& key, const Nonce96& nonce,
               std::span<const uint8_t> plaintext,
               std::span<const uint8_t> aad);
// Throws kAuthentication when the tag does not verify.
Bytes AeadOpen(const Key128& key, const Nonce96& nonce,
               std::span<const uint8_t> sealed, std::span<const uint8_t> aad);

// AES-128-CTR keystream under `seed` with a zero IV.
Bytes PrgExpand(const Key128& seed, size_t nbytes);
// `dim` ring elements, each read big-endian from byte_width() keystream bytes
// and reduced mod 2^k.
RingVector PrgRing(const Key128& seed, const Ring& ring, size_t dim);

// P-256.
const mpz_class& P256Order();

struct EcKeyPair {
  mpz_class secret;
  Bytes public_key;  // 33-byte compressed point
};

EcKeyPair EcGenerate(Csprng& rng);
Bytes EcPublicFromSecret(const mpz_class& secret);
// SHA-256 of the x-coordinate of secret * peer. Throws kMalformed if the peer
// encoding is not a valid point.
Digest EcAgree(const mpz_class& secret, std::span<const uint8_t> peer_public);

}  // namespace crypto
}  // namespace fedreg

#endif  // FEDREG_CRYPTO_PRIMITIVES_H_
