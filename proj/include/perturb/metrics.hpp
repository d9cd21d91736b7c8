#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perturb/bpe.hpp"
#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"

// Corpus-level BLEU, unknown-word rate, Levenshtein distance, and the
// segmentation-divergence statistics that quantify how noise fractures
// subword segmentations.

namespace perturb {

struct BleuScore {
  std::array<double, 4> precisions{};  // modified n-gram precisions, n = 1..4
  double brevity_penalty = 1.0;
  double score = 0.0;  // 0..100
  std::uint64_t hyp_length = 0;
  std::uint64_t ref_length = 0;
};

namespace detail {

// N-grams are keyed by joining tokens with U+001F, which valid tokens can
// never contain.
inline void count_ngrams(const Sentence& sentence, std::size_t n,
                         std::unordered_map<std::u32string, std::uint64_t>& out) {
  if (sentence.size() < n) return;
  for (std::size_t i = 0; i + n <= sentence.size(); ++i) {
    std::u32string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) key += U'';
      key += sentence[i + k];
    }
    ++out[key];
  }
}

}  // namespace detail

// Corpus BLEU with clipped n-gram counts aggregated over all sentence pairs
// before the precisions are formed; single reference, no smoothing. Any
// aggregated match count of zero makes the score 0.
inline BleuScore corpus_bleu(const Corpus& hypotheses, const Corpus& references) {
  if (hypotheses.size() != references.size())
    throw metric_error("hypothesis and reference corpora differ in sentence count (" +
                       std::to_string(hypotheses.size()) + " vs " +
                       std::to_string(references.size()) + ")");

  BleuScore result;
  std::array<std::uint64_t, 4> matched{};
  std::array<std::uint64_t, 4> total{};
  std::unordered_map<std::u32string, std::uint64_t> hyp_grams, ref_grams;

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    result.hyp_length += hypotheses[s].size();
    result.ref_length += references[s].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      hyp_grams.clear();
      ref_grams.clear();
      detail::count_ngrams(hypotheses[s], n, hyp_grams);
      detail::count_ngrams(references[s], n, ref_grams);
      for (const auto& [gram, count] : hyp_grams) {
        total[n - 1] += count;
        const auto it = ref_grams.find(gram);
        if (it != ref_grams.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  if (result.hyp_length == 0) throw metric_error("BLEU is undefined for an empty hypothesis corpus");

  result.brevity_penalty =
      result.hyp_length < result.ref_length
          ? std::exp(1.0 - static_cast<double>(result.ref_length) / static_cast<double>(result.hyp_length))
          : 1.0;

  bool any_zero = false;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (matched[n] == 0) {
      any_zero = true;
      result.precisions[n] = 0.0;
    } else {
      result.precisions[n] = static_cast<double>(matched[n]) / static_cast<double>(total[n]);
      log_sum += std::log(result.precisions[n]);
    }
  }
  result.score = any_zero ? 0.0 : 100.0 * result.brevity_penalty * std::exp(log_sum / 4.0);
  return result;
}

// Fraction of token occurrences not found in the vocabulary.
inline double unk_rate(const Corpus& corpus, const std::unordered_set<Token>& vocabulary) {
  std::uint64_t tokens = 0;
  std::uint64_t unknown = 0;
  for (const auto& sentence : corpus)
    for (const auto& token : sentence) {
      ++tokens;
      if (!vocabulary.contains(token)) ++unknown;
    }
  if (tokens == 0) throw metric_error("unk rate is undefined on a corpus with no tokens");
  return static_cast<double>(unknown) / static_cast<double>(tokens);
}

inline std::unordered_set<Token> vocabulary_of(const Corpus& corpus) {
  std::unordered_set<Token> vocab;
  for (const auto& sentence : corpus) vocab.insert(sentence.begin(), sentence.end());
  return vocab;
}

// Minimal edit distance under unit-cost insertion, deletion, substitution.
inline std::size_t levenshtein(const Token& a, const Token& b) {
  if (a.size() < b.size()) return levenshtein(b, a);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = up;
    }
  }
  return row[b.size()];
}

struct SegmentationDivergence {
  double mean_units_clean = 0.0;
  double mean_units_noisy = 0.0;
  double changed_fraction = 0.0;  // token positions whose unit sequence differs
  double unk_rate_clean = 0.0;
  double unk_rate_noisy = 0.0;
};

// Segments aligned clean/noisy corpora with the same merge table and compares
// them position by position. The corpora must have identical shape, which
// corpus noising guarantees.
inline SegmentationDivergence segmentation_divergence(const Corpus& clean, const Corpus& noisy,
                                                      const bpe::MergeTable& merges,
                                                      const std::unordered_set<Token>& word_vocab) {
  if (clean.size() != noisy.size())
    throw metric_error("clean and noisy corpora differ in sentence count");
  for (std::size_t s = 0; s < clean.size(); ++s)
    if (clean[s].size() != noisy[s].size())
      throw metric_error("clean and noisy corpora differ in token count at sentence " +
                         std::to_string(s + 1));

  std::uint64_t tokens = 0;
  std::uint64_t units_clean = 0;
  std::uint64_t units_noisy = 0;
  std::uint64_t changed = 0;
  std::unordered_map<Token, bpe::SegmentedToken> cache;
  const auto segment = [&](const Token& token) -> const bpe::SegmentedToken& {
    auto it = cache.find(token);
    if (it == cache.end()) it = cache.emplace(token, bpe::bpe_apply(token, merges)).first;
    return it->second;
  };

  for (std::size_t s = 0; s < clean.size(); ++s)
    for (std::size_t i = 0; i < clean[s].size(); ++i) {
      ++tokens;
      const auto& clean_units = segment(clean[s][i]);
      const auto& noisy_units = segment(noisy[s][i]);
      units_clean += clean_units.size();
      units_noisy += noisy_units.size();
      if (clean_units != noisy_units) ++changed;
    }
  if (tokens == 0) throw metric_error("segmentation divergence is undefined on empty corpora");

  SegmentationDivergence out;
  out.mean_units_clean = static_cast<double>(units_clean) / static_cast<double>(tokens);
  out.mean_units_noisy = static_cast<double>(units_noisy) / static_cast<double>(tokens);
  out.changed_fraction = static_cast<double>(changed) / static_cast<double>(tokens);
  out.unk_rate_clean = unk_rate(clean, word_vocab);
  out.unk_rate_noisy = unk_rate(noisy, word_vocab);
  return out;
}

}  // namespace perturb
