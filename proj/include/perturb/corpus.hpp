#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "perturb/errors.hpp"
#include "perturb/unicode.hpp"

// Token/sentence data model plus readers and writers for the two corpus
// formats the toolkit consumes: whitespace-tokenized plain text and the
// 10-column CoNLL-U subset (FORM, UPOS, FEATS).

namespace perturb {

// A token is a non-empty sequence of Unicode scalar values with no
// whitespace or control characters (see is_token_forbidden).
using Token = std::u32string;
using Sentence = std::vector<Token>;

// Sentence order is significant and preserved by every read/write pair.
using Corpus = std::vector<Sentence>;

struct TaggedSentence {
  Sentence tokens;
  std::vector<std::string> tags;  // one opaque label per token

  bool operator==(const TaggedSentence&) const = default;
};
using TaggedCorpus = std::vector<TaggedSentence>;

inline bool is_valid_token(const Token& token) {
  if (token.empty()) return false;
  for (char32_t cp : token)
    if (is_token_forbidden(cp)) return false;
  return true;
}

inline std::size_t token_count(const Corpus& corpus) {
  std::size_t n = 0;
  for (const auto& sentence : corpus) n += sentence.size();
  return n;
}

inline std::size_t token_count(const TaggedCorpus& corpus) {
  std::size_t n = 0;
  for (const auto& sentence : corpus) n += sentence.tokens.size();
  return n;
}

inline Corpus strip_tags(const TaggedCorpus& tagged) {
  Corpus out;
  out.reserve(tagged.size());
  for (const auto& sentence : tagged) out.push_back(sentence.tokens);
  return out;
}

// One sentence per line; tokens are maximal runs not containing space or tab.
// Accepts CRLF line endings and strips the CR. Empty lines become empty
// sentences. Invalid UTF-8 raises a format_error naming the byte offset.
inline Corpus read_plain(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t offset = 0;  // byte offset of the current line start
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t line_bytes = line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::u32string text = decode_utf8(line, offset);
    Sentence sentence;
    Token current;
    auto flush = [&]() {
      if (!current.empty()) {
        sentence.push_back(current);
        current.clear();
      }
    };
    for (char32_t cp : text) {
      if (cp == U' ' || cp == U'\t') {
        flush();
      } else if (is_token_forbidden(cp)) {
        throw format_error("line " + std::to_string(line_no) +
                           ": control character U+" + std::to_string(static_cast<std::uint32_t>(cp)) +
                           " inside a token");
      } else {
        current.push_back(cp);
      }
    }
    flush();
    corpus.push_back(std::move(sentence));
    offset += line_bytes;
  }
  if (in.bad()) throw io_error("read failure on plain-text input");
  return corpus;
}

// Tokens joined by single spaces, one sentence per line, LF endings.
inline void write_plain(std::ostream& out, const Corpus& corpus) {
  std::string buffer;
  for (const auto& sentence : corpus) {
    buffer.clear();
    for (std::size_t i = 0; i < sentence.size(); ++i) {
      if (i > 0) buffer.push_back(' ');
      for (char32_t cp : sentence[i]) append_utf8(buffer, cp);
    }
    buffer.push_back('\n');
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  }
  if (!out) throw io_error("write failure on plain-text output");
}

inline std::string write_plain_string(const Corpus& corpus) {
  std::ostringstream out;
  write_plain(out, corpus);
  return out.str();
}

// CoNLL-U subset: token lines contribute FORM as the token and
// UPOS + "|" + FEATS as its tag. Comment lines and multiword/empty-node IDs
// (containing '-' or '.') are skipped; a blank line ends the sentence.
inline TaggedCorpus read_conllu(std::istream& in) {
  TaggedCorpus corpus;
  TaggedSentence sentence;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&]() {
    if (!sentence.tokens.empty()) {
      corpus.push_back(std::move(sentence));
      sentence = TaggedSentence{};
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        cols.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (cols.size() != 10)
      throw format_error("line " + std::to_string(line_no) + ": expected 10 tab-separated columns, got " +
                         std::to_string(cols.size()));
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
    const Token form = decode_utf8(cols[1]);
    if (!is_valid_token(form))
      throw format_error("line " + std::to_string(line_no) + ": FORM is empty or contains whitespace/control characters");
    sentence.tokens.push_back(form);
    sentence.tags.push_back(cols[3] + "|" + cols[5]);
  }
  flush();
  if (in.bad()) throw io_error("read failure on CoNLL-U input");
  return corpus;
}

// Token occurrence counts keyed by UTF-8 form; feeds vocabulary and
// rare-word decisions.
inline std::unordered_map<std::string, std::uint64_t> count_tokens(const Corpus& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& token : sentence) ++counts[encode_utf8(token)];
  return counts;
}

inline std::unordered_map<std::string, std::uint64_t> count_tokens(const TaggedCorpus& corpus) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sentence : corpus)
    for (const auto& token : sentence.tokens) ++counts[encode_utf8(token)];
  return counts;
}

}  // namespace perturb
