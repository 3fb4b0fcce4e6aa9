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

#ifndef FEDREG_FIXED_POINT_H_
#define FEDREG_FIXED_POINT_H_

#include <span>
#include <vector>

#include <gmpxx.h>

#include "fedreg/ring.h"

namespace fedreg {

struct FpConfig {
  unsigned k = 256;
  unsigned tau = 16;

  Ring ring() const { return Ring(k); }
};

// A ring element together with its scale multiplier s. The value stands for
// real * 2^{s * tau}.
struct ScaledRing {
  mpz_class value;
  unsigned scale = 0;
};

// Round-half-away-from-zero encoding. Throws kOverflow when
// |x| * 2^{s tau} >= 2^{k-1}, kRange for non-finite input.
ScaledRing FpEncode(double x, unsigned scale, const FpConfig& cfg);
std::vector<ScaledRing> FpEncode(std::span<const double> xs, unsigned scale,
                                 const FpConfig& cfg);
// Raw ring values only.
RingVector FpEncodeValues(std::span<const double> xs, unsigned scale,
                          const FpConfig& cfg);

double FpDecode(const ScaledRing& v, const FpConfig& cfg);
double FpDecode(const mpz_class& value, unsigned scale, const FpConfig& cfg);

bool FpDepthOk(const FpConfig& cfg, unsigned max_scale,
               unsigned magnitude_bits);
// Throws kConfig unless max_scale * tau + magnitude_bits <= k - 2.
void FpCheckDepth(const FpConfig& cfg, unsigned max_scale,
                  unsigned magnitude_bits);

}  // namespace fedreg

#endif  // FEDREG_FIXED_POINT_H_
