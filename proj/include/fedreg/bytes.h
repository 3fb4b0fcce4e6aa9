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

#ifndef FEDREG_BYTES_H_
#define FEDREG_BYTES_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace fedreg {

using Bytes = std::vector<uint8_t>;

// Big-endian magnitude of `value`, left-padded to `width` bytes. Throws
// kRange if the value does not fit or is negative.
Bytes MpzToBytes(const mpz_class& value, size_t width);
// Minimal-length big-endian magnitude (empty for zero).
Bytes MpzToBytes(const mpz_class& value);
mpz_class BytesToMpz(std::span<const uint8_t> bytes);

std::string Base64Encode(std::span<const uint8_t> bytes);
Bytes Base64Decode(std::string_view text);

std::string HexEncode(std::span<const uint8_t> bytes);

class ByteWriter {
 public:
  void PutU8(uint8_t v) { out_.push_back(v); }
  void PutU32(uint32_t v);
  void PutU64(uint64_t v);
  void PutRaw(std::span<const uint8_t> bytes);
  // u32 length prefix followed by the bytes.
  void PutBlob(std::span<const uint8_t> bytes);
  // Length-prefixed minimal big-endian integer.
  void PutMpz(const mpz_class& value);
  // Fixed-width big-endian integer, no prefix.
  void PutMpzFixed(const mpz_class& value, size_t width);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

// Reads what ByteWriter wrote. Every accessor throws kMalformed on underrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t GetU8();
  uint32_t GetU32();
  uint64_t GetU64();
  std::span<const uint8_t> GetRaw(size_t n);
  Bytes GetBlob();
  mpz_class GetMpz();
  mpz_class GetMpzFixed(size_t width);

  bool done() const { return pos_ == in_.size(); }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(size_t n) const;

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

}  // namespace fedreg

#endif  // FEDREG_BYTES_H_
