#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/unicode.hpp"

// Byte-pair-encoding subword segmentation: learn merges from word frequency
// counts, replay them on tokens, render with "@@ " continuation markers, and
// decode back to whole tokens.

namespace perturb {
namespace bpe {

// A subword symbol. The word-final flag distinguishes "d" at the end of a
// word from "d" elsewhere so merges never conflate the two.
struct Symbol {
  std::u32string text;
  bool word_final = false;

  bool operator==(const Symbol&) const = default;
  auto operator<=>(const Symbol& other) const {
    if (auto cmp = text <=> other.text; cmp != 0) return cmp;
    return word_final <=> other.word_final;
  }
};

using SymbolPair = std::pair<Symbol, Symbol>;

struct MergeTable {
  std::vector<SymbolPair> merges;
  std::size_t num_requested = 0;
};

// A token split into subword units; every unit except the last is rendered
// with a trailing "@@ " continuation marker.
using SegmentedToken = std::vector<std::u32string>;

inline std::vector<Symbol> to_symbols(const Token& token) {
  std::vector<Symbol> symbols;
  symbols.reserve(token.size());
  for (char32_t cp : token) symbols.push_back({std::u32string(1, cp), false});
  if (!symbols.empty()) symbols.back().word_final = true;
  return symbols;
}

namespace detail {

struct PairHash {
  std::size_t operator()(const SymbolPair& p) const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](const Symbol& s) {
      for (char32_t cp : s.text) {
        h ^= static_cast<std::size_t>(cp);
        h *= 1099511628211ull;
      }
      h ^= s.word_final ? 0x9eu : 0x31u;
      h *= 1099511628211ull;
    };
    mix(p.first);
    mix(p.second);
    return h;
  }
};

// Counts adjacent pairs left to right. A pair of identical symbols is never
// counted twice over the same occurrence ("aaa" holds one ("a","a") pair and
// a trailing "a"), mirroring what greedy replacement would actually merge.
inline void count_pairs(const std::vector<Symbol>& symbols, std::uint64_t freq,
                        std::unordered_map<SymbolPair, std::uint64_t, PairHash>& counts) {
  std::size_t i = 0;
  while (i + 1 < symbols.size()) {
    counts[{symbols[i], symbols[i + 1]}] += freq;
    const bool run_continues = symbols[i] == symbols[i + 1] && i + 2 < symbols.size() &&
                               symbols[i + 2] == symbols[i];
    i += run_continues ? 2 : 1;
  }
}

// One greedy left-to-right replacement pass for a single merge rule.
inline void replace_pair(std::vector<Symbol>& symbols, const SymbolPair& pair) {
  std::vector<Symbol> out;
  out.reserve(symbols.size());
  std::size_t i = 0;
  while (i < symbols.size()) {
    if (i + 1 < symbols.size() && symbols[i] == pair.first && symbols[i + 1] == pair.second) {
      out.push_back({pair.first.text + pair.second.text, pair.second.word_final});
      i += 2;
    } else {
      out.push_back(symbols[i]);
      ++i;
    }
  }
  symbols = std::move(out);
}

}  // namespace detail

// Learns up to num_merges rules: each round counts adjacent pairs weighted by
// word frequency, merges the most frequent pair everywhere (ties broken by
// the smaller (left, right) symbol pair), and stops early once no pair
// occurs at least twice.
inline MergeTable bpe_learn(const std::unordered_map<std::string, std::uint64_t>& word_freqs,
                            std::size_t num_merges) {
  MergeTable table;
  table.num_requested = num_merges;
  if (word_freqs.empty()) throw config_error("cannot learn merges from an empty word list");

  std::vector<std::pair<std::vector<Symbol>, std::uint64_t>> words;
  words.reserve(word_freqs.size());
  for (const auto& [word, freq] : word_freqs) {
    const Token token = decode_utf8(word);
    if (token.empty()) continue;
    words.emplace_back(to_symbols(token), freq);
  }

  std::unordered_map<SymbolPair, std::uint64_t, detail::PairHash> counts;
  for (std::size_t round = 0; round < num_merges; ++round) {
    counts.clear();
    for (const auto& [symbols, freq] : words) detail::count_pairs(symbols, freq, counts);

    const SymbolPair* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, count] : counts) {
      if (count > best_count || (count == best_count && best != nullptr && pair < *best)) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < 2) break;

    table.merges.push_back(*best);
    for (auto& [symbols, freq] : words)
      if (symbols.size() > 1) detail::replace_pair(symbols, *best);
  }
  return table;
}

// Replays the table's merges in learning order over the token's characters.
inline SegmentedToken bpe_apply(const Token& token, const MergeTable& table) {
  std::vector<Symbol> symbols = to_symbols(token);
  for (const auto& merge : table.merges) {
    if (symbols.size() < 2) break;
    detail::replace_pair(symbols, merge);
  }
  SegmentedToken units;
  units.reserve(symbols.size());
  for (auto& symbol : symbols) units.push_back(std::move(symbol.text));
  return units;
}

inline double mean_units_per_token(const Corpus& corpus, const MergeTable& table) {
  std::uint64_t tokens = 0;
  std::uint64_t units = 0;
  for (const auto& sentence : corpus)
    for (const auto& token : sentence) {
      ++tokens;
      units += bpe_apply(token, table).size();
    }
  if (tokens == 0) throw metric_error("mean units per token is undefined on an empty corpus");
  return static_cast<double>(units) / static_cast<double>(tokens);
}

// --- Rendering: units joined by "@@ " within a token, tokens by " ".

inline std::u32string render_segmented(const SegmentedToken& units) {
  std::u32string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0) out += U"@@ ";
    out += units[i];
  }
  return out;
}

inline Corpus segment_corpus(const Corpus& corpus, const MergeTable& table) {
  Corpus out;
  out.reserve(corpus.size());
  std::unordered_map<Token, SegmentedToken> cache;
  for (const auto& sentence : corpus) {
    Sentence rendered;
    for (const auto& token : sentence) {
      auto it = cache.find(token);
      if (it == cache.end()) it = cache.emplace(token, bpe_apply(token, table)).first;
      const SegmentedToken& units = it->second;
      for (std::size_t i = 0; i < units.size(); ++i)
        rendered.push_back(i + 1 < units.size() ? units[i] + U"@@" : units[i]);
    }
    out.push_back(std::move(rendered));
  }
  return out;
}

// Inverse of segment_corpus: joins runs of units whose "@@" marker announces
// a continuation. A sentence may not end mid-word.
inline Corpus decode_corpus(const Corpus& segmented) {
  Corpus out;
  out.reserve(segmented.size());
  for (std::size_t line = 0; line < segmented.size(); ++line) {
    Sentence joined;
    std::u32string pending;
    bool continuing = false;
    for (const auto& unit : segmented[line]) {
      if (unit.size() >= 2 && unit.compare(unit.size() - 2, 2, U"@@") == 0) {
        pending += unit.substr(0, unit.size() - 2);
        continuing = true;
      } else {
        pending += unit;
        joined.push_back(std::move(pending));
        pending.clear();
        continuing = false;
      }
    }
    if (continuing)
      throw format_error("line " + std::to_string(line + 1) +
                         " ends with a dangling continuation unit");
    out.push_back(std::move(joined));
  }
  return out;
}

// --- Merge file: "#bpe v1" header, one "left right" rule per line, with the
// word-final flag rendered as a trailing "</w>".

inline std::string render_symbol(const Symbol& symbol) {
  std::string out = encode_utf8(symbol.text);
  if (symbol.word_final) out += "</w>";
  return out;
}

inline Symbol parse_symbol(const std::string& text) {
  Symbol symbol;
  std::string body = text;
  if (body.size() >= 4 && body.compare(body.size() - 4, 4, "</w>") == 0) {
    symbol.word_final = true;
    body.resize(body.size() - 4);
  }
  symbol.text = decode_utf8(body);
  if (symbol.text.empty()) throw format_error("empty symbol in merge rule");
  return symbol;
}

inline void write_merges(std::ostream& out, const MergeTable& table) {
  out << "#bpe v1\n";
  for (const auto& [left, right] : table.merges)
    out << render_symbol(left) << ' ' << render_symbol(right) << '\n';
  if (!out) throw io_error("write failure on merge file");
}

inline MergeTable read_merges(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("merge file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "#bpe v1") throw format_error("merge file does not start with \"#bpe v1\"");
  MergeTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos)
      throw format_error("merge file line " + std::to_string(line_no) +
                         " is not \"left right\"");
    table.merges.push_back(
        {parse_symbol(line.substr(0, space)), parse_symbol(line.substr(space + 1))});
  }
  table.num_requested = table.merges.size();
  return table;
}

}  // namespace bpe
}  // namespace perturb
