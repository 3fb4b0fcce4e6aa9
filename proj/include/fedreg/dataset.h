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

#ifndef FEDREG_DATASET_H_
#define FEDREG_DATASET_H_

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "fedreg/types.h"

namespace fedreg {

// Numeric table whose last column is the label.
struct Dataset {
  std::vector<std::string> names;  // feature names, then the label name
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  size_t size() const { return y.size(); }
  size_t features() const { return names.empty() ? 0 : names.size() - 1; }
  // Feature columns plus the label column.
  size_t columns() const { return names.size(); }
};

struct CsvOptions {
  // 0 picks ';' when the first line contains one, else ','.
  char delimiter = 0;
  // Feature columns to keep, by name or zero-based index. Empty keeps all.
  std::vector<std::string> keep;
};

// A first row with any non-numeric cell is a header. Parse errors carry
// the 1-based row and column.
Dataset ParseCsv(std::istream& in, const CsvOptions& options = {});
Dataset LoadCsv(const std::string& path, const CsvOptions& options = {});

struct Partition {
  std::vector<LocalDataset> users;
  LocalDataset test;
  size_t unused = 0;  // training rows left over
};

// Shuffles, keeps floor(split * d) rows for training and gives each of the
// m users exactly ell of them. Throws kInsufficientData when m * ell does
// not fit.
Partition PartitionDataset(const Dataset& data, unsigned m, unsigned ell,
                           double split, uint64_t seed);

}  // namespace fedreg

#endif  // FEDREG_DATASET_H_
