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

#ifndef FEDREG_TYPES_H_
#define FEDREG_TYPES_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace fedreg {

enum class ModelKind { kLinear, kRidge, kLogistic };

const char* ModelKindName(ModelKind kind);
// Throws kConfig.
ModelKind ParseModelKind(std::string_view name);

// theta_0 .. theta_n.
using Model = std::vector<double>;

struct LocalDataset {
  std::vector<std::vector<double>> x;
  std::vector<double> y;

  size_t size() const { return y.size(); }
  size_t features() const { return x.empty() ? 0 : x.front().size(); }
};

}  // namespace fedreg

#endif  // FEDREG_TYPES_H_
