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

#include "fedreg/bytes.h"

#include <openssl/evp.h>

#include "fedreg/error.h"

namespace fedreg {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOverflow: return "overflow";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kParameter: return "parameter";
    case ErrorCode::kKeyMismatch: return "key mismatch";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kDimension: return "dimension mismatch";
    case ErrorCode::kAuthentication: return "authentication failure";
    case ErrorCode::kPhase: return "phase";
    case ErrorCode::kInsufficientShares: return "insufficient shares";
    case ErrorCode::kDuplicateIndex: return "duplicate index";
    case ErrorCode::kEmptyDataset: return "empty dataset";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kProtocolAbort: return "protocol abort";
    case ErrorCode::kSessionMismatch: return "session mismatch";
  }
  return "unknown";
}

Bytes MpzToBytes(const mpz_class& value, size_t width) {
  if (sgn(value) < 0) throw Error(ErrorCode::kRange, "negative integer");
  size_t needed = (mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8;
  if (sgn(value) == 0) needed = 0;
  if (needed > width) {
    throw Error(ErrorCode::kRange, "integer does not fit in " +
                                       std::to_string(width) + " bytes");
  }
  Bytes out(width, 0);
  size_t count = 0;
  if (needed > 0) {
    mpz_export(out.data() + (width - needed), &count, 1, 1, 1, 0,
               value.get_mpz_t());
  }
  return out;
}

Bytes MpzToBytes(const mpz_class& value) {
  size_t needed = sgn(value) == 0
                      ? 0
                      : (mpz_sizeinbase(value.get_mpz_t(), 2) + 7) / 8;
  return MpzToBytes(value, needed);
}

mpz_class BytesToMpz(std::span<const uint8_t> bytes) {
  mpz_class out;
  if (!bytes.empty()) {
    mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return out;
}

std::string Base64Encode(std::span<const uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

Bytes Base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) {
    throw Error(ErrorCode::kMalformed, "base64 length not a multiple of 4");
  }
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(),
                          reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::kMalformed, "invalid base64");
  // EVP_DecodeBlock keeps the padding bytes as zeros.
  size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

std::string HexEncode(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

void ByteWriter::PutU32(uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutU64(uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void ByteWriter::PutRaw(std::span<const uint8_t> bytes) {
  out_.insert(out_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::PutBlob(std::span<const uint8_t> bytes) {
  PutU32(static_cast<uint32_t>(bytes.size()));
  PutRaw(bytes);
}

void ByteWriter::PutMpz(const mpz_class& value) { PutBlob(MpzToBytes(value)); }

void ByteWriter::PutMpzFixed(const mpz_class& value, size_t width) {
  PutRaw(MpzToBytes(value, width));
}

void ByteReader::Need(size_t n) const {
  if (in_.size() - pos_ < n) {
    throw Error(ErrorCode::kMalformed, "truncated input");
  }
}

uint8_t ByteReader::GetU8() {
  Need(1);
  return in_[pos_++];
}

uint32_t ByteReader::GetU32() {
  Need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

uint64_t ByteReader::GetU64() {
  Need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
  return v;
}

std::span<const uint8_t> ByteReader::GetRaw(size_t n) {
  Need(n);
  auto out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Bytes ByteReader::GetBlob() {
  uint32_t n = GetU32();
  auto raw = GetRaw(n);
  return Bytes(raw.begin(), raw.end());
}

mpz_class ByteReader::GetMpz() { return BytesToMpz(GetBlob()); }

mpz_class ByteReader::GetMpzFixed(size_t width) {
  return BytesToMpz(GetRaw(width));
}

}  // namespace fedreg
