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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ocn/errors.hpp"
#include "ocn/matrix.hpp"
#include "ocn/rng.hpp"
#include "ocn/vocab.hpp"

namespace ocn {

/// One multiple-choice instance: article, question, K options, gold index.
struct Example {
  std::vector<int> article;
  std::vector<int> question;
  std::vector<std::vector<int>> options;
  int answer = -1;  // -1 when answers are absent (prediction inputs)
  std::string id;

  int option_count() const { return static_cast<int>(options.size()); }
};

struct TruncationLimits {
  int article = 400;
  int question = 30;
  int option = 16;

  int max_packed_length() const { return article + question + option + 2; }
};

/// Half-open [begin, end) range of positions inside a packed sequence.
struct Span {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
};

/// One (article, question, option) sequence: ids laid out as
/// P, SEP, Q, SEP, O_k with per-segment spans that exclude the separators.
struct PackedTriple {
  std::vector<int> ids;
  Span article;
  Span question;
  Span option;
  MaskVector mask;

  int length() const { return static_cast<int>(ids.size()); }
};

/// Head truncation: each segment keeps its first tokens up to the limit.
inline PackedTriple truncate_and_pack(const Example& ex, const TruncationLimits& limits, int k) {
  require(limits.article >= 1 && limits.question >= 1 && limits.option >= 1,
          "truncate_and_pack: limits must be positive");
  require(k >= 0 && k < ex.option_count(), "truncate_and_pack: option index out of range");
  require(!ex.article.empty() && !ex.question.empty() && !ex.options[static_cast<size_t>(k)].empty(),
          "truncate_and_pack: empty segment");

  const auto head = [](const std::vector<int>& v, int limit) {
    const int n = std::min<int>(static_cast<int>(v.size()), limit);
    return std::vector<int>(v.begin(), v.begin() + n);
  };

  const std::vector<int> p = head(ex.article, limits.article);
  const std::vector<int> q = head(ex.question, limits.question);
  const std::vector<int> o = head(ex.options[static_cast<size_t>(k)], limits.option);

  PackedTriple packed;
  packed.ids.reserve(p.size() + q.size() + o.size() + 2);
  packed.article.begin = 0;
  packed.ids.insert(packed.ids.end(), p.begin(), p.end());
  packed.article.end = static_cast<int>(packed.ids.size());
  packed.ids.push_back(Vocabulary::kSep);
  packed.question.begin = static_cast<int>(packed.ids.size());
  packed.ids.insert(packed.ids.end(), q.begin(), q.end());
  packed.question.end = static_cast<int>(packed.ids.size());
  packed.ids.push_back(Vocabulary::kSep);
  packed.option.begin = static_cast<int>(packed.ids.size());
  packed.ids.insert(packed.ids.end(), o.begin(), o.end());
  packed.option.end = static_cast<int>(packed.ids.size());
  packed.mask = MaskVector::all_true(packed.length());
  return packed;
}

// ---------------------------------------------------------------------------
// RACE-format JSON I/O
//
// One file holds {"article": str, "questions": [str], "options": [[str x K]],
// "answers": ["A".."D"], "id": str}, or an array of such objects.
// ---------------------------------------------------------------------------

struct LoadReport {
  int files_parsed = 0;
  int files_skipped = 0;
  int records = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline int answer_letter_to_index(const std::string& letter, int k, const std::string& where) {
  if (letter.size() != 1 || letter[0] < 'A' || letter[0] >= 'A' + k) {
    throw DataError(where + ": answer letter '" + letter + "' outside A-" +
                    std::string(1, static_cast<char>('A' + k - 1)));
  }
  return letter[0] - 'A';
}

inline std::vector<int> tokenize_with(const std::string& text, Vocabulary& vocab, bool grow) {
  return grow ? tokenize_building(text, vocab) : tokenize(text, vocab);
}

/// Parses one RACE record into per-question Examples. Throws DataError on
/// semantic violations (bad answer letter, option-count mismatch, empty
/// segments after tokenization).
inline void parse_race_record(const nlohmann::json& doc, const std::string& where,
                              Vocabulary& vocab, bool grow_vocab, int expected_k,
                              bool require_answers, std::vector<Example>& out) {
  // Missing keys and off-type values raise json exceptions here, which the
  // loader treats as a malformed file.
  const std::string article_text = doc.at("article").get<std::string>();
  const auto& questions = doc.at("questions");
  const auto& options = doc.at("options");
  const bool has_answers = doc.contains("answers") && !doc.at("answers").is_null();
  if (require_answers && !has_answers) {
    throw DataError(where + ": missing answers");
  }
  if (options.size() != questions.size() ||
      (has_answers && doc.at("answers").size() != questions.size())) {
    throw DataError(where + ": questions/options/answers counts disagree");
  }

  const std::vector<int> article_ids = tokenize_with(article_text, vocab, grow_vocab);
  if (article_ids.empty()) throw DataError(where + ": article tokenizes to nothing");

  const std::string base_id =
      doc.contains("id") && doc.at("id").is_string() ? doc.at("id").get<std::string>() : where;

  for (size_t qi = 0; qi < questions.size(); ++qi) {
    Example ex;
    ex.article = article_ids;
    ex.id = base_id + "#" + std::to_string(qi);
    ex.question = tokenize_with(questions.at(qi).get<std::string>(), vocab, grow_vocab);
    if (ex.question.empty()) throw DataError(where + ": question " + std::to_string(qi) + " empty");

    const auto& opt_list = options.at(qi);
    if (static_cast<int>(opt_list.size()) != expected_k) {
      throw DataError(where + ": question " + std::to_string(qi) + " has " +
                      std::to_string(opt_list.size()) + " options, expected " +
                      std::to_string(expected_k));
    }
    for (const auto& opt : opt_list) {
      ex.options.push_back(tokenize_with(opt.get<std::string>(), vocab, grow_vocab));
      if (ex.options.back().empty()) {
        throw DataError(where + ": empty option in question " + std::to_string(qi));
      }
    }
    if (has_answers) {
      ex.answer = answer_letter_to_index(doc.at("answers").at(qi).get<std::string>(), expected_k,
                                         where);
    }
    out.push_back(std::move(ex));
  }
}

inline void parse_race_document(const nlohmann::json& doc, const std::string& where,
                                Vocabulary& vocab, bool grow_vocab, int expected_k,
                                bool require_answers, std::vector<Example>& out) {
  if (doc.is_array()) {
    for (size_t i = 0; i < doc.size(); ++i) {
      parse_race_record(doc[i], where + "[" + std::to_string(i) + "]", vocab, grow_vocab,
                        expected_k, require_answers, out);
    }
  } else {
    parse_race_record(doc, where, vocab, grow_vocab, expected_k, require_answers, out);
  }
}

}  // namespace detail

/// Loads a RACE-format file or directory of files (sorted by name). Files
/// that fail to parse as records are reported in the LoadReport and skipped;
/// semantically invalid values (bad answer letter, wrong option count) raise
/// DataError naming the file.
inline std::vector<Example> load_race_path(const std::string& path, Vocabulary& vocab,
                                           bool grow_vocab, int expected_k = 4,
                                           LoadReport* report = nullptr,
                                           bool require_answers = true) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::file_status st = fs::status(path, ec);
  if (ec || (!fs::is_regular_file(st) && !fs::is_directory(st))) {
    throw DataError("load_race_path: cannot read '" + path + "'");
  }

  std::vector<std::string> files;
  if (fs::is_directory(st)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("load_race_path: no files under '" + path + "'");
  } else {
    files.push_back(path);
  }

  std::vector<Example> out;
  for (const std::string& file : files) {
    std::ifstream ifs(file);
    if (!ifs) throw DataError("load_race_path: cannot open '" + file + "'");
    try {
      const nlohmann::json doc = nlohmann::json::parse(ifs);
      detail::parse_race_document(doc, file, vocab, grow_vocab, expected_k, require_answers, out);
      if (report) ++report->files_parsed;
    } catch (const nlohmann::json::exception& e) {
      if (report) {
        ++report->files_skipped;
        report->warnings.push_back(file + ": skipped (" + e.what() + ")");
      }
    }
  }
  if (report) report->records = static_cast<int>(out.size());
  return out;
}

/// Serializes examples back to the RACE JSON shape (one record per example).
inline nlohmann::json dataset_to_race_json(const std::vector<Example>& examples,
                                           const Vocabulary& vocab) {
  const auto join = [&vocab](const std::vector<int>& ids) {
    std::string s;
    for (size_t i = 0; i < ids.size(); ++i) {
      if (i) s += ' ';
      s += vocab.token_of(ids[i]);
    }
    return s;
  };

  nlohmann::json arr = nlohmann::json::array();
  for (const Example& ex : examples) {
    nlohmann::json rec;
    rec["id"] = ex.id;
    rec["article"] = join(ex.article);
    rec["questions"] = nlohmann::json::array({join(ex.question)});
    nlohmann::json opts = nlohmann::json::array();
    for (const auto& o : ex.options) opts.push_back(join(o));
    rec["options"] = nlohmann::json::array({opts});
    require(ex.answer >= 0 && ex.answer < ex.option_count(),
            "dataset_to_race_json: example lacks an answer");
    rec["answers"] =
        nlohmann::json::array({std::string(1, static_cast<char>('A' + ex.answer))});
    arr.push_back(std::move(rec));
  }
  return arr;
}

inline void write_race_file(const std::string& path, const std::vector<Example>& examples,
                            const Vocabulary& vocab) {
  std::ofstream ofs(path);
  if (!ofs) throw DataError("write_race_file: cannot write '" + path + "'");
  ofs << dataset_to_race_json(examples, vocab).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Synthetic tasks
// ---------------------------------------------------------------------------

enum class SynthTask {
  kLexicalOverlap,            // correct option copied verbatim from the article
  kNearDuplicateDistractors,  // options differ in exactly one token
};

inline SynthTask synth_task_from_string(const std::string& s) {
  if (s == "lexical_overlap") return SynthTask::kLexicalOverlap;
  if (s == "near_duplicate_distractors") return SynthTask::kNearDuplicateDistractors;
  throw DataError("unknown synth task '" + s + "'");
}

inline std::string to_string(SynthTask task) {
  return task == SynthTask::kLexicalOverlap ? "lexical_overlap" : "near_duplicate_distractors";
}

struct SynthSpec {
  SynthTask task = SynthTask::kLexicalOverlap;
  uint64_t seed = 0;
  int count = 1;
  int vocab_size = 50;  // content word types, excludes the reserved ids
  int options = 4;
  int article_min = 12;
  int article_max = 20;
  int question_min = 2;
  int question_max = 4;
  int option_min = 2;
  int option_max = 4;
};

/// Deterministic synthetic MCRC examples. Content words are "w0".."w{V-1}"
/// and are registered in `vocab`.
inline std::vector<Example> synth_generate(const SynthSpec& spec, Vocabulary& vocab) {
  require(spec.vocab_size >= 20, "synth_generate: vocab_size must be >= 20");
  require(spec.count >= 1, "synth_generate: count must be >= 1");
  require(spec.options >= 2, "synth_generate: need at least two options");
  require(spec.article_min >= spec.option_max + 1,
          "synth_generate: articles must be longer than options");

  std::vector<int> words;
  words.reserve(static_cast<size_t>(spec.vocab_size));
  for (int i = 0; i < spec.vocab_size; ++i) {
    words.push_back(vocab.add("w" + std::to_string(i)));
  }

  Rng rng(spec.seed);
  const auto pick_len = [&rng](int lo, int hi) { return lo + rng.below(hi - lo + 1); };
  const auto random_tokens = [&](int len) {
    std::vector<int> out(static_cast<size_t>(len));
    for (int& id : out) id = words[static_cast<size_t>(rng.below(spec.vocab_size))];
    return out;
  };

  std::vector<Example> out;
  out.reserve(static_cast<size_t>(spec.count));
  for (int e = 0; e < spec.count; ++e) {
    Example ex;
    ex.id = to_string(spec.task) + "-" + std::to_string(spec.seed) + "-" + std::to_string(e);
    ex.answer = rng.below(spec.options);
    ex.question = random_tokens(pick_len(spec.question_min, spec.question_max));
    ex.options.assign(static_cast<size_t>(spec.options), {});

    if (spec.task == SynthTask::kLexicalOverlap) {
      ex.article = random_tokens(pick_len(spec.article_min, spec.article_max));
      const int alen = static_cast<int>(ex.article.size());
      const int olen = pick_len(spec.option_min, std::min(spec.option_max, alen));
      const int start = rng.below(alen - olen + 1);
      ex.options[static_cast<size_t>(ex.answer)] =
          std::vector<int>(ex.article.begin() + start, ex.article.begin() + start + olen);

      // Distractor tokens avoid the article's token set so the overlap signal
      // is unambiguous at this scale.
      const std::set<int> in_article(ex.article.begin(), ex.article.end());
      std::vector<int> complement;
      for (int id : words) {
        if (!in_article.count(id)) complement.push_back(id);
      }
      for (int k = 0; k < spec.options; ++k) {
        if (k == ex.answer) continue;
        const int dlen = pick_len(spec.option_min, spec.option_max);
        std::vector<int>& opt = ex.options[static_cast<size_t>(k)];
        opt.resize(static_cast<size_t>(dlen));
        for (int& id : opt) {
          id = complement.empty()
                   ? words[static_cast<size_t>(rng.below(spec.vocab_size))]
                   : complement[static_cast<size_t>(rng.below(static_cast<int>(complement.size())))];
        }
      }
    } else {
      // Four distinct fill tokens; only the correct one occurs in the article.
      std::vector<int> fills;
      while (static_cast<int>(fills.size()) < spec.options) {
        const int id = words[static_cast<size_t>(rng.below(spec.vocab_size))];
        if (std::find(fills.begin(), fills.end(), id) == fills.end()) fills.push_back(id);
      }
      const int correct_fill = fills[static_cast<size_t>(ex.answer)];
      const std::set<int> forbidden(fills.begin(), fills.end());

      const int alen = pick_len(spec.article_min, spec.article_max);
      ex.article.resize(static_cast<size_t>(alen));
      for (int& id : ex.article) {
        do {
          id = words[static_cast<size_t>(rng.below(spec.vocab_size))];
        } while (forbidden.count(id));
      }
      ex.article[static_cast<size_t>(rng.below(alen))] = correct_fill;

      // Template tokens come from the article so presence-in-article alone
      // barely separates the options; the differing slot carries the answer.
      const int tlen = pick_len(std::max(2, spec.option_min), spec.option_max);
      std::vector<int> tmpl(static_cast<size_t>(tlen));
      for (int& id : tmpl) {
        do {
          id = ex.article[static_cast<size_t>(rng.below(alen))];
        } while (forbidden.count(id));
      }
      const int slot = rng.below(tlen);
      for (int k = 0; k < spec.options; ++k) {
        ex.options[static_cast<size_t>(k)] = tmpl;
        ex.options[static_cast<size_t>(k)][static_cast<size_t>(slot)] =
            fills[static_cast<size_t>(k)];
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace ocn
