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

#include "fedreg/dataset.h"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include "fedreg/crypto/rng.h"
#include "fedreg/error.h"

namespace fedreg {

namespace {

std::string Trim(std::string_view s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  s = s.substr(a, b - a);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::vector<std::string> Split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) out.push_back(Trim(cell));
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::optional<double> ToDouble(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    return std::nullopt;
  }
  return v;
}

[[noreturn]] void Fail(size_t row, size_t col, const std::string& what) {
  throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ", column " +
                                     std::to_string(col) + ": " + what);
}

std::vector<size_t> ResolveKeep(const std::vector<std::string>& keep,
                                const std::vector<std::string>& names) {
  const size_t n = names.size() - 1;
  std::vector<size_t> out;
  if (keep.empty()) {
    out.resize(n);
    std::iota(out.begin(), out.end(), size_t{0});
    return out;
  }
  for (const auto& k : keep) {
    auto it = std::find(names.begin(), names.begin() + n, k);
    if (it != names.begin() + n) {
      out.push_back(static_cast<size_t>(it - names.begin()));
      continue;
    }
    size_t idx = 0;
    auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), idx);
    if (ec != std::errc() || ptr != k.data() + k.size() || idx >= n) {
      throw Error(ErrorCode::kConfig, "unknown feature column '" + k + "'");
    }
    out.push_back(idx);
  }
  return out;
}

}  // namespace

Dataset ParseCsv(std::istream& in, const CsvOptions& options) {
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> line_of;
  std::string line;
  char delim = options.delimiter;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    if (delim == 0) delim = line.find(';') != std::string::npos ? ';' : ',';
    rows.push_back(Split(line, delim));
    line_of.push_back(line_no);
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyDataset, "no rows");

  Dataset raw;
  size_t first = 0;
  const bool header = std::any_of(rows[0].begin(), rows[0].end(),
                                  [](const auto& c) { return !ToDouble(c); });
  if (header) {
    raw.names = rows[0];
    first = 1;
  } else {
    for (size_t c = 0; c < rows[0].size(); ++c) {
      raw.names.push_back("c" + std::to_string(c));
    }
  }
  const size_t cols = raw.names.size();
  if (cols < 2) throw Error(ErrorCode::kParse, "need a feature and a label");

  std::vector<std::vector<double>> values;
  for (size_t r = first; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      Fail(line_of[r], std::min(rows[r].size(), cols) + 1,
           "expected " + std::to_string(cols) + " cells, found " +
               std::to_string(rows[r].size()));
    }
    std::vector<double> v(cols);
    for (size_t c = 0; c < cols; ++c) {
      auto d = ToDouble(rows[r][c]);
      if (!d) Fail(line_of[r], c + 1, "non-numeric cell '" + rows[r][c] + "'");
      if (!std::isfinite(*d)) Fail(line_of[r], c + 1, "non-finite cell");
      v[c] = *d;
    }
    values.push_back(std::move(v));
  }
  if (values.empty()) throw Error(ErrorCode::kEmptyDataset, "no data rows");

  const std::vector<size_t> keep = ResolveKeep(options.keep, raw.names);
  Dataset out;
  for (size_t c : keep) out.names.push_back(raw.names[c]);
  out.names.push_back(raw.names.back());
  for (const auto& v : values) {
    std::vector<double> x;
    x.reserve(keep.size());
    for (size_t c : keep) x.push_back(v[c]);
    out.x.push_back(std::move(x));
    out.y.push_back(v.back());
  }
  return out;
}

Dataset LoadCsv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + path);
  return ParseCsv(in, options);
}

Partition PartitionDataset(const Dataset& data, unsigned m, unsigned ell,
                           double split, uint64_t seed) {
  if (!(split > 0 && split <= 1)) {
    throw Error(ErrorCode::kConfig, "split ratio must lie in (0, 1]");
  }
  const size_t train = static_cast<size_t>(std::floor(split * data.size()));
  const size_t need = size_t{m} * ell;
  if (m == 0 || ell == 0 || need > train) {
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(m) + " users x " + std::to_string(ell) +
                    " points need " + std::to_string(need) +
                    " training rows, have " + std::to_string(train));
  }
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Csprng rng(seed, "partition");
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.Below(uint64_t{i})]);
  }
  Partition p;
  p.users.resize(m);
  for (unsigned u = 0; u < m; ++u) {
    for (unsigned i = 0; i < ell; ++i) {
      const size_t row = order[size_t{u} * ell + i];
      p.users[u].x.push_back(data.x[row]);
      p.users[u].y.push_back(data.y[row]);
    }
  }
  p.unused = train - need;
  for (size_t i = train; i < order.size(); ++i) {
    p.test.x.push_back(data.x[order[i]]);
    p.test.y.push_back(data.y[order[i]]);
  }
  return p;
}

}  // namespace fedreg
