// src/checkpoint.cpp

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

#include "emogest/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "emogest/errors.hpp"

namespace emogest {

namespace {
constexpr char kMagic[8] = {'E', 'G', 'C', 'K', 'P', 'T', '1', '\n'};
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void Checkpoint::save(const std::string& path) const {
  nlohmann::json header;
  header["config"] = config;
  nlohmann::json index = nlohmann::json::array();
  for (const auto& [name, t] : tensors)
    index.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  header["tensors"] = index;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("Checkpoint::save: cannot open " + path);
  f.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hs.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& [name, t] : tensors)
    f.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!f) throw ConfigError("Checkpoint::save: write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("Checkpoint::load: cannot open " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ConfigError("Checkpoint::load: bad magic in " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  f.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!f) throw ConfigError("Checkpoint::load: truncated header in " + path);
  nlohmann::json header = nlohmann::json::parse(hs);

  Checkpoint ck;
  ck.config = header.at("config");
  for (const auto& e : header.at("tensors")) {
    Tensor t(e.at("rows").get<int>(), e.at("cols").get<int>());
    f.read(reinterpret_cast<char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!f) throw ConfigError("Checkpoint::load: truncated tensor data in " + path);
    ck.tensors.emplace_back(e.at("name").get<std::string>(), std::move(t));
  }
  return ck;
}

void Checkpoint::capture(const std::vector<nn::ParamRef>& params) {
  tensors.clear();
  tensors.reserve(params.size());
  for (const auto& p : params) tensors.emplace_back(p.name, p.var->value());
}

void Checkpoint::restore(const std::vector<nn::ParamRef>& params) const {
  if (params.size() != tensors.size())
    throw ConfigError("Checkpoint::restore: parameter count mismatch (model has " +
                      std::to_string(params.size()) + ", checkpoint has " +
                      std::to_string(tensors.size()) + ")");
  for (const auto& p : params) {
    const Tensor* t = find(p.name);
    if (t == nullptr) throw ConfigError("Checkpoint::restore: missing tensor " + p.name);
    if (t->rows() != p.var->rows() || t->cols() != p.var->cols())
      throw ConfigError("Checkpoint::restore: shape mismatch for " + p.name);
    p.var->mutable_value() = *t;
  }
}

}  // namespace emogest
