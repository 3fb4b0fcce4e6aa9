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

#include "fedreg/fixed_point.h"

#include <cmath>
#include <string>

#include "fedreg/error.h"

namespace fedreg {

ScaledRing FpEncode(double x, unsigned scale, const FpConfig& cfg) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kRange, "cannot encode a non-finite value");
  }
  const double magnitude = std::round(std::ldexp(std::fabs(x), scale * cfg.tau));
  if (magnitude >= std::ldexp(1.0, static_cast<int>(cfg.k) - 1)) {
    throw Error(ErrorCode::kOverflow,
                "value " + std::to_string(x) + " overflows scale " +
                    std::to_string(scale));
  }
  mpz_class v;
  mpz_set_d(v.get_mpz_t(), magnitude);
  ScaledRing out;
  out.scale = scale;
  if (x < 0 && sgn(v) != 0) {
    mpz_class mod;
    mpz_ui_pow_ui(mod.get_mpz_t(), 2, cfg.k);
    out.value = mod - v;
  } else {
    out.value = v;
  }
  return out;
}

std::vector<ScaledRing> FpEncode(std::span<const double> xs, unsigned scale,
                                 const FpConfig& cfg) {
  std::vector<ScaledRing> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(FpEncode(x, scale, cfg));
  return out;
}

RingVector FpEncodeValues(std::span<const double> xs, unsigned scale,
                          const FpConfig& cfg) {
  RingVector out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(FpEncode(x, scale, cfg).value);
  return out;
}

double FpDecode(const mpz_class& value, unsigned scale, const FpConfig& cfg) {
  mpz_class half;
  mpz_ui_pow_ui(half.get_mpz_t(), 2, cfg.k - 1);
  const int shift = -static_cast<int>(scale * cfg.tau);
  if (value >= half) {
    mpz_class mod = half * 2;
    mpz_class mag = mod - value;
    return -std::ldexp(mpz_get_d(mag.get_mpz_t()), shift);
  }
  return std::ldexp(mpz_get_d(value.get_mpz_t()), shift);
}

double FpDecode(const ScaledRing& v, const FpConfig& cfg) {
  return FpDecode(v.value, v.scale, cfg);
}

bool FpDepthOk(const FpConfig& cfg, unsigned max_scale,
               unsigned magnitude_bits) {
  return static_cast<unsigned long>(max_scale) * cfg.tau + magnitude_bits + 2 <=
         cfg.k;
}

void FpCheckDepth(const FpConfig& cfg, unsigned max_scale,
                  unsigned magnitude_bits) {
  if (!FpDepthOk(cfg, max_scale, magnitude_bits)) {
    throw Error(ErrorCode::kConfig,
                "fixed-point depth " + std::to_string(max_scale) + "*" +
                    std::to_string(cfg.tau) + "+" +
                    std::to_string(magnitude_bits) + " exceeds k-2 = " +
                    std::to_string(cfg.k - 2));
  }
}

}  // namespace fedreg
