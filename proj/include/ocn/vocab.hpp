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

#include <cctype>
#include <string>
#include <unordered_map>
#include <vector>

#include "ocn/errors.hpp"

namespace ocn {

/// Token table with three reserved ids. Built from the training split only;
/// anything unseen maps to UNK afterwards.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSep = 2;
  static constexpr int kReservedCount = 3;

  Vocabulary() {
    add("[pad]");
    add("[unk]");
    add("[sep]");
  }

  /// Inserts if absent; returns the id either way.
  int add(const std::string& token) {
    auto it = to_id_.find(token);
    if (it != to_id_.end()) return it->second;
    const int id = static_cast<int>(to_token_.size());
    to_id_[token] = id;
    to_token_.push_back(token);
    return id;
  }

  /// kUnk for unseen tokens.
  int id_of(const std::string& token) const {
    auto it = to_id_.find(token);
    return it == to_id_.end() ? kUnk : it->second;
  }

  const std::string& token_of(int id) const {
    require(id >= 0 && id < size(), "Vocabulary: id out of range");
    return to_token_[static_cast<size_t>(id)];
  }

  int size() const { return static_cast<int>(to_token_.size()); }

  /// Full id->token list, reserved entries included (checkpoint payload).
  const std::vector<std::string>& tokens() const { return to_token_; }

  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    require(tokens.size() >= 3, "Vocabulary: token list missing reserved entries");
    Vocabulary v;
    require(tokens[0] == v.token_of(kPad) && tokens[1] == v.token_of(kUnk) &&
                tokens[2] == v.token_of(kSep),
            "Vocabulary: reserved entries corrupted");
    for (size_t i = 3; i < tokens.size(); ++i) v.add(tokens[i]);
    require(v.size() == static_cast<int>(tokens.size()), "Vocabulary: duplicate tokens in list");
    return v;
  }

 private:
  std::unordered_map<std::string, int> to_id_;
  std::vector<std::string> to_token_;
};

/// Lowercases and splits on whitespace and punctuation boundaries. Runs of
/// alphanumeric characters (and non-ASCII bytes) form words; every other
/// visible character is its own token. "chocolate-themed park" ->
/// ["chocolate", "-", "themed", "park"].
inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::isalnum(c) || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

/// Token ids under a frozen vocabulary (unknowns -> UNK).
inline std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const std::string& w : split_words(text)) ids.push_back(vocab.id_of(w));
  return ids;
}

/// Token ids while growing the vocabulary (training split pass).
inline std::vector<int> tokenize_building(const std::string& text, Vocabulary& vocab) {
  std::vector<int> ids;
  for (const std::string& w : split_words(text)) ids.push_back(vocab.add(w));
  return ids;
}

}  // namespace ocn
