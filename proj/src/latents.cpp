// src/latents.cpp

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

#include "emogest/latents.hpp"

#include <fstream>

#include <json.hpp>

#include "emogest/errors.hpp"

namespace emogest {

namespace {

nlohmann::json row_to_json(const Tensor& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (int c = 0; c < t.cols(); ++c) arr.push_back(t.at(0, c));
  return arr;
}

Tensor row_from_json(const nlohmann::json& arr) {
  Tensor t(1, static_cast<int>(arr.size()));
  for (int c = 0; c < t.cols(); ++c) t.at(0, c) = arr[c].get<double>();
  return t;
}

}  // namespace

void save_latents(const std::string& path, const AudioLatents& l) {
  nlohmann::json j = {{"dim", l.dim()},
                      {"content", row_to_json(l.content)},
                      {"emotion", row_to_json(l.emotion)},
                      {"style", row_to_json(l.style)}};
  std::ofstream f(path);
  if (!f) throw InvalidInput("save_latents: cannot open " + path);
  f << j.dump() << "\n";
}

AudioLatents load_latents(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("load_latents: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  AudioLatents l;
  l.content = row_from_json(j.at("content"));
  l.emotion = row_from_json(j.at("emotion"));
  l.style = row_from_json(j.at("style"));
  if (l.content.cols() != j.at("dim").get<int>() || l.emotion.cols() != l.content.cols() ||
      l.style.cols() != l.content.cols())
    throw InvalidInput("load_latents: inconsistent dims in " + path);
  return l;
}

}  // namespace emogest
