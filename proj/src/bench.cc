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

#include "fedreg/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "fedreg/bus.h"
#include "fedreg/crypto/rng.h"
#include "fedreg/fixed_point.h"
#include "fedreg/secagg.h"
#include "fedreg/slg.h"

namespace fedreg::bench {

namespace {

using Clock = std::chrono::steady_clock;

double Ms(Clock::time_point from) {
  return std::chrono::duration<double, std::milli>(Clock::now() - from)
      .count();
}

std::string Fixed(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string OpsText(const HeOpCounts& c) {
  return std::to_string(c.ct_mul) + "/" + std::to_string(c.const_mul) + "/" +
         std::to_string(c.enc);
}

}  // namespace

void PrintTable(std::ostream& out, const Table& table) {
  std::vector<size_t> width(table.header.size());
  for (size_t c = 0; c < width.size(); ++c) width[c] = table.header[c].size();
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    out << '|';
    for (size_t c = 0; c < width.size(); ++c) {
      out << ' ' << std::setw(static_cast<int>(width[c])) << std::right
          << (c < cells.size() ? cells[c] : "") << " |";
    }
    out << '\n';
  };
  out << table.title << '\n';
  line(table.header);
  out << '|';
  for (size_t w : width) out << std::string(w + 2, '-') << '|';
  out << '\n';
  for (const auto& row : table.rows) line(row);
}

void PrintCsv(std::ostream& out, const Table& table) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t c = 0; c < cells.size(); ++c) {
      out << (c ? "," : "") << cells[c];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
}

Table He(AheBackend backend, unsigned modulus_bits, unsigned k,
         const std::vector<unsigned>& ns, uint64_t seed) {
  Table t;
  t.title = std::string("Vector HE operations, ") + AheBackendName(backend) +
            " " + std::to_string(modulus_bits) + "-bit, time in ms";
  t.header = {"n", "operation", "ms"};
  Csprng rng(seed, "bench/he");
  const AheKeyPair keys = AheKeygen(backend, modulus_bits, k, rng);
  const Ring ring(k);
  for (unsigned n : ns) {
    RingVector m(n);
    for (auto& v : m) v = ring.Random(rng);
    std::vector<Ciphertext> cts(n);
    auto start = Clock::now();
    for (unsigned i = 0; i < n; ++i) cts[i] = keys.pk->Encrypt(m[i], rng);
    t.rows.push_back({std::to_string(n), "enc", Fixed(Ms(start))});
    start = Clock::now();
    for (unsigned i = 0; i < n; ++i) (void)keys.sk->Decrypt(cts[i]);
    t.rows.push_back({std::to_string(n), "dec", Fixed(Ms(start))});
    start = Clock::now();
    for (unsigned i = 0; i < n; ++i) {
      (void)keys.pk->ScalarMul(cts[i], m[(i + 1) % n]);
    }
    t.rows.push_back({std::to_string(n), "const-mul", Fixed(Ms(start))});
  }
  return t;
}

Table Agg(const std::vector<unsigned>& ms, double dropout, unsigned dims,
          unsigned k, uint64_t seed) {
  Table t;
  t.title = "Dropout-enabled aggregation, " +
            Fixed(100 * dropout, 0) + "% dropout, time in ms";
  t.header = {"m", "t", "dropped", "alive", "ms", "sum"};
  const Ring ring(k);
  static constexpr secagg::AggPhase kBoundaries[] = {
      secagg::AggPhase::kShareKeys, secagg::AggPhase::kMaskedInput,
      secagg::AggPhase::kConsistency, secagg::AggPhase::kUnmask};
  for (unsigned m : ms) {
    Csprng rng(seed, "bench/agg/" + std::to_string(m));
    const unsigned thr = (m + 2) / 3;
    std::vector<uint32_t> users(m);
    std::map<uint32_t, RingVector> inputs;
    for (uint32_t u = 1; u <= m; ++u) {
      users[u - 1] = u;
      RingVector x(dims);
      for (auto& v : x) v = ring.Random(rng);
      inputs[u] = std::move(x);
    }
    const unsigned dropped = static_cast<unsigned>(std::floor(dropout * m));
    secagg::DropSchedule drops;
    for (unsigned i = 0; i < dropped; ++i) {
      drops.Drop(users[m - 1 - i], kBoundaries[i % 4]);
    }
    auto start = Clock::now();
    secagg::AggResult res = secagg::RunDea(users, inputs, thr, drops, k, seed);
    const double ms_run = Ms(start);
    bool match = res.ok();
    if (match) {
      RingVector expect(dims, 0);
      for (uint32_t u : res.alive) expect = ring.AddVec(expect, inputs[u]);
      match = expect == res.sum;
    }
    t.rows.push_back({std::to_string(m), std::to_string(thr),
                      std::to_string(dropped), std::to_string(res.alive.size()),
                      Fixed(ms_run), match ? "match" : "MISMATCH"});
  }
  return t;
}

Table Slg(ModelKind kind, const std::vector<unsigned>& ns,
          const std::vector<unsigned>& ds, AheBackend backend,
          unsigned modulus_bits, unsigned k, uint64_t seed) {
  Table t;
  t.title = std::string("SLG per-user counters, ") + ModelKindName(kind) +
            " (ct_mul/const_mul/enc)";
  t.header = {"n", "d_i", "measured", "formula", "bits", "formula bits",
              "check"};
  Csprng keyrng(seed, "bench/slg/keygen");
  const AheKeyPair keys = AheKeygen(backend, modulus_bits, k, keyrng);
  const FpConfig fp{k, 16};
  const Ring ring = fp.ring();
  const RingVector q = slg::FitSigmoidCubic().Encoded(fp);
  for (unsigned n : ns) {
    for (unsigned d : ds) {
      Csprng data_rng(seed, "bench/slg/data");
      LocalDataset data;
      for (unsigned i = 0; i < d; ++i) {
        std::vector<double> x(n);
        for (auto& v : x) v = 2 * data_rng.Uniform01() - 1;
        data.x.push_back(std::move(x));
        data.y.push_back(kind == ModelKind::kLogistic
                             ? static_cast<double>(data_rng() & 1)
                             : data_rng.Uniform01());
      }
      Model theta(n + 1);
      for (auto& v : theta) v = 0.1 * (2 * data_rng.Uniform01() - 1);
      Csprng user_rng(seed, "bench/slg/user");
      Csprng server_rng(seed, "bench/slg/server");
      HeEvaluator server_ev(*keys.pk, server_rng);
      const auto enc_model = server_ev.Encrypt(slg::EncodeModel(theta, fp));
      SimBus bus;
      const slg::SlgExchange ex = slg::RunSlgSession(
          bus, 1, 1, kind, keys, enc_model,
          slg::EncodeDataset(data, kind, fp), q, ring, user_rng, server_rng);
      const HeOpCounts want = slg::OpCountFormula(kind, n, d);
      const uint64_t want_bits =
          slg::CommBitsFormula(kind, n, d, keys.pk->ciphertext_bits());
      const bool ok = ex.user_ops.ct_mul == want.ct_mul &&
                      ex.user_ops.const_mul == want.const_mul &&
                      ex.user_ops.enc == want.enc &&
                      ex.ciphertext_bits == want_bits;
      t.rows.push_back({std::to_string(n), std::to_string(d),
                        OpsText(ex.user_ops), OpsText(want),
                        std::to_string(ex.ciphertext_bits),
                        std::to_string(want_bits), ok ? "match" : "MISMATCH"});
    }
  }
  return t;
}

bool AllMatch(const Table& table) {
  for (const auto& row : table.rows) {
    if (!row.empty() && row.back() != "match") return false;
  }
  return true;
}

}  // namespace fedreg::bench
