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

#include "fedreg/secret_share.h"

#include <set>
#include <string>

#include "fedreg/crypto/primitives.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg::shamir {

PrimeField::PrimeField(mpz_class q) : q_(std::move(q)) {
  if (q_ < 2) throw Error(ErrorCode::kParameter, "field order must be >= 2");
}

mpz_class PrimeField::Reduce(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), q_.get_mpz_t());
  return r;
}

mpz_class PrimeField::Inverse(const mpz_class& v) const {
  mpz_class r;
  if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), q_.get_mpz_t()) == 0) {
    throw Error(ErrorCode::kParameter, "element not invertible");
  }
  return r;
}

mpz_class PrimeField::Random(Csprng& rng) const { return rng.Below(q_); }

const PrimeField& DefaultField() {
  static const PrimeField field(crypto::P256Order());
  return field;
}

std::vector<Share> SplitAt(const mpz_class& secret, unsigned t,
                           std::span<const uint32_t> points, Csprng& rng,
                           const PrimeField& field) {
  if (t < 1 || t > points.size()) {
    throw Error(ErrorCode::kParameter, "need 1 <= t <= m");
  }
  if (points.size() >= field.order()) {
    throw Error(ErrorCode::kParameter, "too many shares for the field");
  }
  std::set<uint32_t> seen;
  for (uint32_t p : points) {
    if (p == 0 || !seen.insert(p).second || p >= field.order()) {
      throw Error(ErrorCode::kParameter, "share points must be distinct and non-zero");
    }
  }
  std::vector<mpz_class> coeffs(t);
  coeffs[0] = field.Reduce(secret);
  for (unsigned i = 1; i < t; ++i) coeffs[i] = field.Random(rng);
  std::vector<Share> out;
  out.reserve(points.size());
  for (uint32_t p : points) {
    mpz_class acc = 0;
    for (unsigned i = t; i-- > 0;) acc = field.Reduce(acc * p + coeffs[i]);
    out.push_back(Share{p, acc});
  }
  return out;
}

std::vector<Share> Split(const mpz_class& secret, unsigned t, unsigned m,
                         Csprng& rng, const PrimeField& field) {
  std::vector<uint32_t> points(m);
  for (unsigned i = 0; i < m; ++i) points[i] = i + 1;
  return SplitAt(secret, t, points, rng, field);
}

namespace {

void CheckDistinct(std::span<const Share> shares) {
  std::set<uint32_t> seen;
  for (const auto& s : shares) {
    if (!seen.insert(s.index).second) {
      throw Error(ErrorCode::kDuplicateIndex,
                  "duplicate share index " + std::to_string(s.index));
    }
  }
}

}  // namespace

mpz_class Reconstruct(std::span<const Share> shares, unsigned t,
                      const PrimeField& field) {
  if (t < 1 || shares.size() < t) {
    throw Error(ErrorCode::kInsufficientShares,
                "have " + std::to_string(shares.size()) + " shares, need " +
                    std::to_string(t));
  }
  CheckDistinct(shares);
  auto used = shares.first(t);
  mpz_class acc = 0;
  for (size_t i = 0; i < used.size(); ++i) {
    mpz_class num = 1, den = 1;
    for (size_t j = 0; j < used.size(); ++j) {
      if (i == j) continue;
      num = field.Reduce(num * used[j].index);
      den = field.Reduce(den * (mpz_class(used[j].index) - used[i].index));
    }
    acc = field.Reduce(acc + used[i].value * num * field.Inverse(den));
  }
  return acc;
}

std::vector<mpz_class> Interpolate(std::span<const Share> shares,
                                   const PrimeField& field) {
  CheckDistinct(shares);
  const size_t n = shares.size();
  std::vector<mpz_class> out(n, 0);
  for (size_t i = 0; i < n; ++i) {
    // Basis polynomial prod_{j != i} (X - x_j) / (x_i - x_j).
    std::vector<mpz_class> basis{1};
    mpz_class den = 1;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<mpz_class> next(basis.size() + 1, 0);
      for (size_t d = 0; d < basis.size(); ++d) {
        next[d + 1] = field.Reduce(next[d + 1] + basis[d]);
        next[d] = field.Reduce(next[d] - basis[d] * shares[j].index);
      }
      basis = std::move(next);
      den = field.Reduce(den * (mpz_class(shares[i].index) - shares[j].index));
    }
    mpz_class scale = field.Reduce(shares[i].value * field.Inverse(den));
    for (size_t d = 0; d < n; ++d) {
      out[d] = field.Reduce(out[d] + basis[d] * scale);
    }
  }
  return out;
}

Bytes EncodeShare(const Share& share) {
  ByteWriter w;
  w.PutU32(share.index);
  w.PutMpzFixed(share.value, 32);
  return std::move(w).bytes();
}

Share DecodeShare(std::span<const uint8_t> bytes) {
  if (bytes.size() != kShareWireBytes) {
    throw Error(ErrorCode::kMalformed, "share must be 36 bytes");
  }
  ByteReader r(bytes);
  Share s;
  s.index = r.GetU32();
  s.value = r.GetMpzFixed(32);
  return s;
}

}  // namespace fedreg::shamir
