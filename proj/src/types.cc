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

#include "fedreg/types.h"

#include <string>

#include "fedreg/error.h"

namespace fedreg {

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear";
    case ModelKind::kRidge: return "ridge";
    case ModelKind::kLogistic: return "logistic";
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  if (name == "linear") return ModelKind::kLinear;
  if (name == "ridge") return ModelKind::kRidge;
  if (name == "logistic") return ModelKind::kLogistic;
  throw Error(ErrorCode::kConfig, "unknown model kind '" + std::string(name) + "'");
}

}  // namespace fedreg
