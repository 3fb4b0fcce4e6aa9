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

#ifndef FEDREG_BENCH_H_
#define FEDREG_BENCH_H_

#include <ostream>
#include <string>
#include <vector>

#include "fedreg/ahe.h"
#include "fedreg/types.h"

namespace fedreg::bench {

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void PrintTable(std::ostream& out, const Table& table);
void PrintCsv(std::ostream& out, const Table& table);

// Milliseconds for vector encryption, decryption and constant
// multiplication; three rows per n.
Table He(AheBackend backend, unsigned modulus_bits, unsigned k,
         const std::vector<unsigned>& ns, uint64_t seed);

// One aggregation per m with the given dropout fraction spread over the
// phase boundaries. Each row records whether the sum matched.
Table Agg(const std::vector<unsigned>& ms, double dropout, unsigned dims,
          unsigned k, uint64_t seed);

// Measured per-user counters of one SLG run against the closed forms.
Table Slg(ModelKind kind, const std::vector<unsigned>& ns,
          const std::vector<unsigned>& ds, AheBackend backend,
          unsigned modulus_bits, unsigned k, uint64_t seed);

// True when every row of an Agg or Slg table matched.
bool AllMatch(const Table& table);

}  // namespace fedreg::bench

#endif  // FEDREG_BENCH_H_
