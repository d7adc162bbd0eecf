// Copyright 2026 OCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ocn/config.hpp"
#include "ocn/errors.hpp"
#include "ocn/model.hpp"
#include "ocn/params.hpp"
#include "ocn/vocab.hpp"

namespace ocn {

// File layout: one line of JSON (manifest: format tag, step, seed, config
// echo, vocabulary, per-parameter name/shape/decay/byte-offset), then the raw
// parameter payload as little-endian IEEE-754 float64, concatenated in
// manifest order. Doubles travel as exact bit patterns, so a round trip is
// bit-identical.

inline constexpr const char* kCheckpointFormat = "ocn-checkpoint-v1";

namespace detail {

inline void append_double_le(std::string& out, double x) {
  uint64_t bits = 0;
  std::memcpy(&bits, &x, sizeof(bits));
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
}

inline double read_double_le(const char* p) {
  uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  double x = 0.0;
  std::memcpy(&x, &bits, sizeof(x));
  return x;
}

}  // namespace detail

struct CheckpointData {
  ParameterSet params;
  ModelConfig config;
  Vocabulary vocab;
  int step = 0;
};

inline void save_checkpoint(const std::string& path, const ParameterSet& params,
                            const ModelConfig& config, const Vocabulary& vocab, int step) {
  nlohmann::json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["step"] = step;
  manifest["seed"] = config.seed;
  manifest["config"] = model_config_to_json(config);
  manifest["vocab"] = vocab.tokens();

  std::string payload;
  nlohmann::json entries = nlohmann::json::array();
  size_t offset = 0;
  for (int i = 0; i < params.count(); ++i) {
    const Matrix& m = params.value(i);
    entries.push_back({{"name", params.name(i)},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"decays", params.decays(i)},
                       {"offset", offset}});
    for (size_t e = 0; e < m.size(); ++e) detail::append_double_le(payload, m[e]);
    offset += m.size() * 8;
  }
  manifest["params"] = std::move(entries);

  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) throw DataError("save_checkpoint: cannot write '" + path + "'");
  ofs << manifest.dump() << "\n";
  ofs.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!ofs) throw DataError("save_checkpoint: write failed for '" + path + "'");
}

inline CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs) throw DataError("load_checkpoint: cannot open '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(ifs)), std::istreambuf_iterator<char>());
  const size_t newline = content.find('\n');
  if (newline == std::string::npos) {
    throw DataError("load_checkpoint: '" + path + "' has no manifest line");
  }

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(content.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_checkpoint: bad manifest in '" + path + "' (" + e.what() + ")");
  }
  if (!manifest.contains("format") || manifest.at("format") != kCheckpointFormat) {
    throw DataError("load_checkpoint: '" + path + "' is not a " + kCheckpointFormat + " file");
  }

  CheckpointData out;
  try {
    out.step = manifest.at("step").get<int>();
    out.config = model_config_from_json(manifest.at("config"), "checkpoint.config");
    out.vocab = Vocabulary::from_tokens(
        manifest.at("vocab").get<std::vector<std::string>>());

    const char* payload = content.data() + newline + 1;
    const size_t payload_size = content.size() - newline - 1;
    for (const auto& entry : manifest.at("params")) {
      const std::string name = entry.at("name").get<std::string>();
      const int rows = entry.at("rows").get<int>();
      const int cols = entry.at("cols").get<int>();
      const bool decays = entry.at("decays").get<bool>();
      const size_t offset = entry.at("offset").get<size_t>();
      const size_t bytes = static_cast<size_t>(rows) * static_cast<size_t>(cols) * 8;
      if (offset + bytes > payload_size) {
        throw DataError("load_checkpoint: payload too short for '" + name + "'");
      }
      Matrix m(rows, cols);
      for (size_t e = 0; e < m.size(); ++e) {
        m[e] = detail::read_double_le(payload + offset + e * 8);
      }
      out.params.add(name, std::move(m), decays);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("load_checkpoint: manifest field error in '" + path + "' (" + e.what() + ")");
  }
  if (out.config.vocab_size != out.vocab.size()) {
    throw DataError("load_checkpoint: vocab size disagrees with config");
  }
  return out;
}

}  // namespace ocn
