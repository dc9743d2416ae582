// emogest/checkpoint.hpp

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emogest/nn.hpp"
#include "emogest/tensor.hpp"

namespace emogest {

// Self-describing binary container: a JSON header (architecture config plus
// a named tensor index) followed by raw little-endian float64 data. Loading
// into a model verifies the embedded config and every tensor name/shape and
// fails loudly on mismatch.
class Checkpoint {
 public:
  nlohmann::json config;
  std::vector<std::pair<std::string, Tensor>> tensors;

  void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }
  const Tensor* find(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

  // Captures params in registry order; restore requires an exact name and
  // shape match for every parameter.
  void capture(const std::vector<nn::ParamRef>& params);
  void restore(const std::vector<nn::ParamRef>& params) const;
};

}  // namespace emogest
