#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/rng.hpp"

// The three word-form perturbation generators (neighbor swaps, interior
// scrambles, character flips), sentence-level mixtures of them, and the
// replacement alphabet. Everything is a pure function of its RngStream, and
// corpus noising derives one substream per sentence, so results never depend
// on evaluation order.

namespace perturb {

enum class NoiseKind { clean, swap, scramble, flip };

inline const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::clean: return "clean";
    case NoiseKind::swap: return "swap";
    case NoiseKind::scramble: return "scramble";
    case NoiseKind::flip: return "flip";
  }
  return "?";
}

inline NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "clean") return NoiseKind::clean;
  if (name == "swap") return NoiseKind::swap;
  if (name == "scramble") return NoiseKind::scramble;
  if (name == "flip") return NoiseKind::flip;
  throw config_error("unknown noise kind \"" + name + "\"");
}

struct NoiseSpec {
  NoiseKind kind = NoiseKind::clean;
  // Per-position probability for swap and flip. Scramble always permutes the
  // whole interior (conceptually rate 1); clean ignores the rate.
  double rate = 0.0;

  bool operator==(const NoiseSpec&) const = default;
};

inline NoiseSpec clean_spec() { return {NoiseKind::clean, 0.0}; }
inline NoiseSpec swap_spec(double rate) { return {NoiseKind::swap, rate}; }
inline NoiseSpec scramble_spec() { return {NoiseKind::scramble, 1.0}; }
inline NoiseSpec flip_spec(double rate) { return {NoiseKind::flip, rate}; }

enum class MixtureMode { cycle, sample };

struct MixtureEntry {
  NoiseSpec spec;
  double weight = 1.0;  // ignored in cycle mode

  bool operator==(const MixtureEntry&) const = default;
};

// A sentence-level noise distribution. Cycle mode applies entries round-robin
// by sentence index; sample mode draws each sentence's entry categorically by
// weight from the sentence's own substream.
struct MixtureSpec {
  MixtureMode mode = MixtureMode::cycle;
  std::vector<MixtureEntry> entries;

  bool operator==(const MixtureSpec&) const = default;
};

inline MixtureSpec clean_mixture() { return {MixtureMode::cycle, {{clean_spec(), 1.0}}}; }

inline bool mixture_uses_flip(const MixtureSpec& mixture) {
  return std::any_of(mixture.entries.begin(), mixture.entries.end(),
                     [](const MixtureEntry& e) { return e.spec.kind == NoiseKind::flip; });
}

inline void validate(const MixtureSpec& mixture) {
  if (mixture.entries.empty()) throw config_error("mixture needs at least one entry");
  double sum = 0.0;
  for (const auto& entry : mixture.entries) {
    if (!(entry.spec.rate >= 0.0 && entry.spec.rate <= 1.0))
      throw config_error("noise rate must lie in [0,1]");
    if (!(entry.weight >= 0.0)) throw config_error("mixture weights must be non-negative");
    sum += entry.weight;
  }
  if (mixture.mode == MixtureMode::sample && std::abs(sum - 1.0) > 1e-9)
    throw config_error("sample-mode mixture weights must sum to 1");
}

// Ordered, duplicate-free set of candidate replacement characters for flips.
// Whitespace and control characters are rejected; at least two characters are
// required so a replacement that differs from the original always exists.
class Alphabet {
 public:
  static Alphabet from_chars(std::vector<char32_t> chars) {
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    for (char32_t cp : chars)
      if (is_token_forbidden(cp))
        throw config_error("alphabet must not contain whitespace or control characters");
    if (chars.size() < 2) throw config_error("alphabet needs at least 2 characters");
    Alphabet alphabet;
    alphabet.chars_ = std::move(chars);
    return alphabet;
  }

  std::size_t size() const { return chars_.size(); }
  char32_t at(std::size_t i) const { return chars_[i]; }
  const std::vector<char32_t>& chars() const { return chars_; }

  std::optional<std::size_t> index_of(char32_t cp) const {
    const auto it = std::lower_bound(chars_.begin(), chars_.end(), cp);
    if (it == chars_.end() || *it != cp) return std::nullopt;
    return static_cast<std::size_t>(it - chars_.begin());
  }

 private:
  Alphabet() = default;
  std::vector<char32_t> chars_;
};

namespace detail {
template <typename CorpusT>
Alphabet alphabet_from(const CorpusT& corpus) {
  std::set<char32_t> seen;
  if constexpr (std::is_same_v<CorpusT, Corpus>) {
    for (const auto& sentence : corpus)
      for (const auto& token : sentence) seen.insert(token.begin(), token.end());
  } else {
    for (const auto& sentence : corpus)
      for (const auto& token : sentence.tokens) seen.insert(token.begin(), token.end());
  }
  if (seen.empty()) throw config_error("cannot build an alphabet from a corpus with no tokens");
  if (seen.size() < 2) throw config_error("corpus yields an alphabet of fewer than 2 characters");
  return Alphabet::from_chars({seen.begin(), seen.end()});
}
}  // namespace detail

// All distinct characters occurring in any token, ascending by code point.
inline Alphabet build_alphabet(const Corpus& corpus) { return detail::alphabet_from(corpus); }
inline Alphabet build_alphabet(const TaggedCorpus& corpus) { return detail::alphabet_from(corpus); }

// Neighbor swaps, applied left to right over the already-modified sequence:
// at each position i a draw u < rate exchanges characters i and i+1, so a
// character can ride several swaps to the right.
inline Token swap_word(Token token, double rate, RngStream& rng) {
  if (token.size() < 2) return token;
  for (std::size_t i = 0; i + 1 < token.size(); ++i)
    if (rng.real() < rate) std::swap(token[i], token[i + 1]);
  return token;
}

// Uniform permutation of the interior characters; first and last characters
// stay in place, and the identity permutation is a legal outcome. Tokens of
// length <= 3 have no movable interior and are returned unchanged.
inline Token scramble_word(Token token, RngStream& rng) {
  if (token.size() <= 3) return token;
  for (std::size_t i = token.size() - 2; i > 1; --i) {
    const std::size_t j = 1 + rng.below(i);  // j uniform in [1, i]
    std::swap(token[i], token[j]);
  }
  return token;
}

// Independent per-position replacement: with probability `rate` the character
// is redrawn uniformly from the alphabet minus the original, so a flipped
// position always differs from what it replaced.
inline Token flip_word(Token token, double rate, const Alphabet& alphabet, RngStream& rng) {
  for (char32_t& ch : token) {
    if (rng.real() >= rate) continue;
    if (const auto original = alphabet.index_of(ch)) {
      std::size_t j = rng.below(alphabet.size() - 1);
      if (j >= *original) ++j;
      ch = alphabet.at(j);
    } else {
      // Character outside the alphabet: every alphabet entry already differs.
      ch = alphabet.at(rng.below(alphabet.size()));
    }
  }
  return token;
}

// Applies the spec's generator to every token in order, consuming the stream
// token by token. Clean returns the sentence unchanged without consuming any
// randomness.
inline Sentence noise_sentence(const Sentence& sentence, const NoiseSpec& spec, RngStream& rng,
                               const Alphabet* alphabet = nullptr) {
  if (spec.kind == NoiseKind::clean) return sentence;
  if (spec.kind == NoiseKind::flip && alphabet == nullptr)
    throw config_error("flip noise requires an alphabet");
  Sentence out;
  out.reserve(sentence.size());
  for (const auto& token : sentence) {
    switch (spec.kind) {
      case NoiseKind::swap: out.push_back(swap_word(token, spec.rate, rng)); break;
      case NoiseKind::scramble: out.push_back(scramble_word(token, rng)); break;
      case NoiseKind::flip: out.push_back(flip_word(token, spec.rate, *alphabet, rng)); break;
      case NoiseKind::clean: break;  // handled above
    }
  }
  return out;
}

struct NoiseResult {
  Corpus corpus;
  std::vector<NoiseSpec> assignments;  // per-sentence spec actually applied
};

// Noises a whole corpus under a mixture. Sentence i uses the substream
// derive_seed(seed, i): in sample mode the categorical draw comes first from
// that substream, then token noising continues on it. Output is therefore
// independent of evaluation order.
inline NoiseResult noise_corpus(const Corpus& corpus, const MixtureSpec& mixture, std::uint64_t seed,
                                const Alphabet* alphabet = nullptr) {
  validate(mixture);
  if (mixture_uses_flip(mixture) && alphabet == nullptr)
    throw config_error("flip noise requires an alphabet");
  NoiseResult result;
  result.corpus.reserve(corpus.size());
  result.assignments.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    RngStream rng(derive_seed(seed, i));
    NoiseSpec spec;
    if (mixture.mode == MixtureMode::cycle) {
      spec = mixture.entries[i % mixture.entries.size()].spec;
    } else {
      const double u = rng.real();
      double cumulative = 0.0;
      std::size_t pick = mixture.entries.size() - 1;  // last entry absorbs rounding
      for (std::size_t k = 0; k < mixture.entries.size(); ++k) {
        cumulative += mixture.entries[k].weight;
        if (u < cumulative) {
          pick = k;
          break;
        }
      }
      spec = mixture.entries[pick].spec;
    }
    result.corpus.push_back(noise_sentence(corpus[i], spec, rng, alphabet));
    result.assignments.push_back(spec);
  }
  return result;
}

// Upper bound on the word forms reachable with at most one character flip:
// n positions times C candidate characters.
inline std::uint64_t flip_variant_bound(std::uint64_t word_length, std::uint64_t alphabet_size) {
  if (word_length < 1) throw config_error("flip_variant_bound: word length must be >= 1");
  if (alphabet_size < 2) throw config_error("flip_variant_bound: alphabet size must be >= 2");
  return word_length * alphabet_size;
}

// Number of distinct scrambles of a word of length n: (n-2)! interior
// permutations, 1 when the interior has at most one character.
inline std::uint64_t scramble_variant_count(std::uint64_t word_length) {
  if (word_length < 1) throw config_error("scramble_variant_count: word length must be >= 1");
  if (word_length <= 3) return 1;
  std::uint64_t count = 1;
  for (std::uint64_t factor = 2; factor <= word_length - 2; ++factor) {
    if (count > UINT64_MAX / factor)
      throw std::overflow_error("scramble_variant_count: (n-2)! exceeds the 64-bit count range for n=" +
                                std::to_string(word_length));
    count *= factor;
  }
  return count;
}

// --- JSON document: {"mode":"cycle"|"sample","entries":[{"kind":...,"rate":...,"weight":...}],"seed":N}

struct MixtureDocument {
  MixtureSpec mixture;
  std::optional<std::uint64_t> seed;
};

inline MixtureDocument mixture_from_json(const nlohmann::json& doc) {
  try {
    MixtureDocument out;
    if (!doc.is_object()) throw config_error("mixture document must be a JSON object");
    nlohmann::json entries;
    if (doc.contains("kind")) {
      // Single-spec shorthand: treat as a one-entry cycle mixture.
      out.mixture.mode = MixtureMode::cycle;
      entries = nlohmann::json::array({doc});
    } else {
      const std::string mode = doc.at("mode").get<std::string>();
      if (mode == "cycle") {
        out.mixture.mode = MixtureMode::cycle;
      } else if (mode == "sample") {
        out.mixture.mode = MixtureMode::sample;
      } else {
        throw config_error("mixture mode must be \"cycle\" or \"sample\"");
      }
      entries = doc.at("entries");
      if (!entries.is_array()) throw config_error("mixture entries must be an array");
    }
    for (const auto& item : entries) {
      MixtureEntry entry;
      entry.spec.kind = noise_kind_from_string(item.at("kind").get<std::string>());
      switch (entry.spec.kind) {
        case NoiseKind::clean: entry.spec.rate = 0.0; break;
        case NoiseKind::scramble: entry.spec.rate = item.value("rate", 1.0); break;
        case NoiseKind::swap:
        case NoiseKind::flip:
          if (!item.contains("rate"))
            throw config_error(std::string(to_string(entry.spec.kind)) + " entry requires a rate");
          entry.spec.rate = item.at("rate").get<double>();
          break;
      }
      if (out.mixture.mode == MixtureMode::sample) {
        if (!item.contains("weight")) throw config_error("sample-mode entries require weights");
        entry.weight = item.at("weight").get<double>();
      } else {
        entry.weight = item.value("weight", 1.0);
      }
      out.mixture.entries.push_back(entry);
    }
    if (doc.contains("seed")) out.seed = doc.at("seed").get<std::uint64_t>();
    validate(out.mixture);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad mixture JSON: ") + e.what());
  }
}

inline nlohmann::json mixture_to_json(const MixtureSpec& mixture,
                                      std::optional<std::uint64_t> seed = std::nullopt) {
  nlohmann::json doc;
  doc["mode"] = mixture.mode == MixtureMode::cycle ? "cycle" : "sample";
  auto entries = nlohmann::json::array();
  for (const auto& entry : mixture.entries) {
    nlohmann::json item;
    item["kind"] = to_string(entry.spec.kind);
    item["rate"] = entry.spec.rate;
    item["weight"] = entry.weight;
    entries.push_back(item);
  }
  doc["entries"] = entries;
  if (seed) doc["seed"] = *seed;
  return doc;
}

// Assignment log: sentence_index \t kind \t rate.
inline void write_assignments(std::ostream& out, const std::vector<NoiseSpec>& assignments) {
  char rate[32];
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    std::snprintf(rate, sizeof rate, "%.4f", assignments[i].rate);
    out << i << '\t' << to_string(assignments[i].kind) << '\t' << rate << '\n';
  }
  if (!out) throw io_error("write failure on assignment log");
}

}  // namespace perturb
