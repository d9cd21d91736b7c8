#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/noise.hpp"
#include "perturb/rng.hpp"
#include "perturb/unicode.hpp"

// Averaged-perceptron morphological tagger with word, neighbor, shape, and
// rare-word affix features. Tags each token independently. Training can
// regenerate a freshly noised copy of the corpus every epoch while keeping
// the gold tags, which is what makes the tagger noise-adaptive.

namespace perturb {

using FeatureVector = std::vector<std::pair<std::string, std::uint32_t>>;
using FrequencyMap = std::unordered_map<std::string, std::uint64_t>;

struct TrainConfig {
  std::uint32_t epochs = 5;
  std::uint64_t seed = 0;
  MixtureSpec augmentation = clean_mixture();
  std::uint64_t rare_threshold = 10;
};

struct TaggerModel {
  std::vector<std::string> tagset;  // order fixes argmax tie-breaking
  // feature key -> (tag index, averaged weight), each list sorted by tag index
  std::unordered_map<std::string, std::vector<std::pair<std::uint32_t, double>>> weights;
  FrequencyMap vocab;  // clean training-token frequencies, gates affix features
  TrainConfig meta;
};

namespace detail {

inline bool is_ascii_upper(char32_t cp) { return cp >= U'A' && cp <= U'Z'; }
inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
inline bool is_ascii_punct(char32_t cp) {
  return (cp >= U'!' && cp <= U'/') || (cp >= U':' && cp <= U'@') ||
         (cp >= U'[' && cp <= U'`') || (cp >= U'{' && cp <= U'~');
}

inline std::u32string ascii_lower(const Token& token) {
  std::u32string out = token;
  for (char32_t& cp : out)
    if (is_ascii_upper(cp)) cp += 0x20;
  return out;
}

inline std::string neighbor_key(const Sentence& sentence, std::size_t index, int offset) {
  const long long pos = static_cast<long long>(index) + offset;
  std::string key = "w";
  key += offset > 0 ? "+" : "";  // negative offsets bring their own sign
  key += std::to_string(offset);
  key += '=';
  if (pos < 0) {
    key += "<S>";
  } else if (pos >= static_cast<long long>(sentence.size())) {
    key += "</S>";
  } else {
    key += encode_utf8(sentence[static_cast<std::size_t>(pos)]);
  }
  return key;
}

}  // namespace detail

// Feature templates for one token: identity, lowercased identity, neighbor
// identities at offsets -2..+2 with boundary sentinels, shape flags, a bias,
// and prefixes/suffixes of lengths 1..10 for words that are rare in (or
// absent from) the training vocabulary.
inline FeatureVector extract_features(const Sentence& sentence, std::size_t index,
                                      const FrequencyMap& vocab, std::uint64_t rare_threshold) {
  const Token& word = sentence[index];
  const std::string word_utf8 = encode_utf8(word);
  FeatureVector features;
  features.reserve(24);
  features.emplace_back("bias", 1);
  features.emplace_back("w0=" + word_utf8, 1);
  features.emplace_back("lc0=" + encode_utf8(detail::ascii_lower(word)), 1);
  for (int offset : {-2, -1, 1, 2})
    features.emplace_back(detail::neighbor_key(sentence, index, offset), 1);

  bool has_digit = false, has_punct = false;
  bool all_caps = !word.empty();
  for (char32_t cp : word) {
    has_digit = has_digit || detail::is_ascii_digit(cp);
    has_punct = has_punct || detail::is_ascii_punct(cp);
    all_caps = all_caps && detail::is_ascii_upper(cp);
  }
  if (has_digit) features.emplace_back("has_digit", 1);
  if (has_punct) features.emplace_back("has_punct", 1);
  if (all_caps) features.emplace_back("all_caps", 1);
  if (!word.empty() && detail::is_ascii_upper(word.front()))
    features.emplace_back("init_upper", 1);

  const auto it = vocab.find(word_utf8);
  const bool rare = it == vocab.end() || it->second < rare_threshold;
  if (rare) {
    const std::size_t max_len = std::min<std::size_t>(word.size(), 10);
    for (std::size_t k = 1; k <= max_len; ++k) {
      features.emplace_back("pre" + std::to_string(k) + "=" + encode_utf8(word.substr(0, k)), 1);
      features.emplace_back("suf" + std::to_string(k) + "=" + encode_utf8(word.substr(word.size() - k)), 1);
    }
  }
  return features;
}

namespace detail {

// Argmax of weight . features over the tagset; the lowest tag index wins
// ties, so an untrained model always answers tagset[0].
template <typename WeightMap>
std::uint32_t predict_index(const WeightMap& weights, const FeatureVector& features,
                            std::size_t tag_count, std::vector<double>& scores) {
  scores.assign(tag_count, 0.0);
  for (const auto& [key, count] : features) {
    const auto it = weights.find(key);
    if (it == weights.end()) continue;
    for (const auto& slot : it->second)
      scores[slot.tag] += static_cast<double>(count) * slot.value();
  }
  std::uint32_t best = 0;
  for (std::uint32_t t = 1; t < tag_count; ++t)
    if (scores[t] > scores[best]) best = t;
  return best;
}

struct TrainSlot {
  std::uint32_t tag = 0;
  double weight = 0.0;
  double accumulated = 0.0;
  std::uint64_t last_step = 0;  // step at whose end `weight` took effect

  double value() const { return weight; }
};

struct AveragedSlot {
  std::uint32_t tag = 0;
  double weight = 0.0;

  double value() const { return weight; }
};

}  // namespace detail

inline std::vector<std::string> collect_tagset(const TaggedCorpus& corpus) {
  std::vector<std::string> tagset;
  std::unordered_set<std::string> seen;
  for (const auto& sentence : corpus)
    for (const auto& tag : sentence.tags)
      if (seen.insert(tag).second) tagset.push_back(tag);
  return tagset;
}

// One perceptron training run. Per epoch the corpus is re-noised from the
// substream (seed, epoch) with gold tags kept, sentences are visited in a
// seed-derived shuffled order, and each mistagged token moves weight from
// the predicted tag to the gold tag. The returned weights are averaged over
// every token step of the run.
inline TaggerModel train_tagger(const TaggedCorpus& corpus, const TrainConfig& config) {
  if (corpus.empty()) throw config_error("cannot train on an empty corpus");
  if (config.epochs < 1) throw config_error("training needs at least one epoch");
  validate(config.augmentation);

  TaggerModel model;
  model.meta = config;
  model.tagset = collect_tagset(corpus);
  if (model.tagset.empty()) throw config_error("training corpus has no tagged tokens");
  std::unordered_map<std::string, std::uint32_t> tag_index;
  for (std::uint32_t t = 0; t < model.tagset.size(); ++t) tag_index[model.tagset[t]] = t;

  const Corpus clean_tokens = strip_tags(corpus);
  model.vocab = count_tokens(clean_tokens);

  std::optional<Alphabet> alphabet;
  if (mixture_uses_flip(config.augmentation)) alphabet = build_alphabet(clean_tokens);

  std::uint64_t total_steps = 0;
  for (const auto& sentence : corpus) total_steps += sentence.tokens.size();
  total_steps *= config.epochs;
  if (total_steps == 0) throw config_error("training corpus has no tokens");

  std::unordered_map<std::string, std::vector<detail::TrainSlot>> weights;
  const auto update = [&weights](const std::string& key, std::uint32_t tag, double delta,
                                 std::uint64_t step) {
    auto& slots = weights[key];
    auto it = std::lower_bound(slots.begin(), slots.end(), tag,
                               [](const detail::TrainSlot& s, std::uint32_t t) { return s.tag < t; });
    if (it == slots.end() || it->tag != tag) it = slots.insert(it, {tag, 0.0, 0.0, 0});
    it->accumulated += it->weight * static_cast<double>(step - 1 - it->last_step);
    it->last_step = step - 1;
    it->weight += delta;
  };

  std::vector<std::size_t> order(corpus.size());
  std::vector<double> scores;
  std::uint64_t step = 0;
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    const NoiseResult noised =
        noise_corpus(clean_tokens, config.augmentation, derive_seed(config.seed, epoch),
                     alphabet ? &*alphabet : nullptr);

    std::iota(order.begin(), order.end(), 0);
    RngStream shuffle_rng(derive_seed(config.seed ^ fnv1a64("shuffle"), epoch));
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(i + 1)]);

    for (const std::size_t s : order) {
      const Sentence& tokens = noised.corpus[s];
      const auto& gold_tags = corpus[s].tags;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        ++step;
        const FeatureVector features =
            extract_features(tokens, i, model.vocab, config.rare_threshold);
        const std::uint32_t predicted =
            detail::predict_index(weights, features, model.tagset.size(), scores);
        const std::uint32_t gold = tag_index.at(gold_tags[i]);
        if (predicted == gold) continue;
        for (const auto& [key, count] : features) {
          update(key, gold, static_cast<double>(count), step);
          update(key, predicted, -static_cast<double>(count), step);
        }
      }
    }
  }

  for (auto& [key, slots] : weights) {
    std::vector<std::pair<std::uint32_t, double>> averaged;
    averaged.reserve(slots.size());
    for (const auto& slot : slots) {
      const double sum = slot.accumulated +
                         slot.weight * static_cast<double>(total_steps - slot.last_step);
      const double mean = sum / static_cast<double>(total_steps);
      if (mean != 0.0) averaged.emplace_back(slot.tag, mean);
    }
    if (!averaged.empty()) model.weights.emplace(key, std::move(averaged));
  }
  return model;
}

inline std::vector<std::string> predict_tags(const TaggerModel& model, const Sentence& sentence) {
  std::vector<std::string> tags;
  tags.reserve(sentence.size());
  std::vector<double> scores;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const FeatureVector features =
        extract_features(sentence, i, model.vocab, model.meta.rare_threshold);
    scores.assign(model.tagset.size(), 0.0);
    for (const auto& [key, count] : features) {
      const auto it = model.weights.find(key);
      if (it == model.weights.end()) continue;
      for (const auto& [tag, weight] : it->second)
        scores[tag] += static_cast<double>(count) * weight;
    }
    std::uint32_t best = 0;
    for (std::uint32_t t = 1; t < model.tagset.size(); ++t)
      if (scores[t] > scores[best]) best = t;
    tags.push_back(model.tagset[best]);
  }
  return tags;
}

// Micro-averaged token accuracy.
inline double evaluate_tagger(const TaggerModel& model, const TaggedCorpus& corpus) {
  std::uint64_t total = 0;
  std::uint64_t correct = 0;
  for (const auto& sentence : corpus) {
    const std::vector<std::string> predicted = predict_tags(model, sentence.tokens);
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      ++total;
      if (predicted[i] == sentence.tags[i]) ++correct;
    }
  }
  if (total == 0) throw metric_error("tag accuracy is undefined on a corpus with no tokens");
  return static_cast<double>(correct) / static_cast<double>(total);
}

// --- Model file: "#tagger v1" header, then meta, tagset, vocabulary, and
// weights, each introduced by a count line. Weights are written as hex
// floats so reading restores them bit for bit.

inline void write_model(std::ostream& out, const TaggerModel& model) {
  out << "#tagger v1\n";
  out << "epochs\t" << model.meta.epochs << '\n';
  out << "seed\t" << model.meta.seed << '\n';
  out << "rare_threshold\t" << model.meta.rare_threshold << '\n';
  out << "augmentation\t" << mixture_to_json(model.meta.augmentation).dump() << '\n';

  out << "tags\t" << model.tagset.size() << '\n';
  for (const auto& tag : model.tagset) out << tag << '\n';

  std::vector<std::pair<std::string, std::uint64_t>> vocab(model.vocab.begin(), model.vocab.end());
  std::sort(vocab.begin(), vocab.end());
  out << "vocab\t" << vocab.size() << '\n';
  for (const auto& [word, count] : vocab) out << word << '\t' << count << '\n';

  std::vector<std::pair<std::string, const std::vector<std::pair<std::uint32_t, double>>*>> keys;
  keys.reserve(model.weights.size());
  std::size_t rows = 0;
  for (const auto& [key, slots] : model.weights) {
    keys.emplace_back(key, &slots);
    rows += slots.size();
  }
  std::sort(keys.begin(), keys.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  out << "weights\t" << rows << '\n';
  char buffer[48];
  for (const auto& [key, slots] : keys)
    for (const auto& [tag, weight] : *slots) {
      std::snprintf(buffer, sizeof buffer, "%a", weight);
      out << key << '\t' << tag << '\t' << buffer << '\n';
    }
  if (!out) throw io_error("write failure on model file");
}

namespace detail {

inline std::string next_model_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw format_error(std::string("model file ends before ") + what);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::uint64_t parse_count_line(const std::string& line, const std::string& field) {
  const std::string prefix = field + "\t";
  if (line.compare(0, prefix.size(), prefix) != 0)
    throw format_error("model file: expected \"" + field + "\" line, got \"" + line + "\"");
  try {
    return std::stoull(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw format_error("model file: bad number in \"" + line + "\"");
  }
}

}  // namespace detail

inline TaggerModel read_model(std::istream& in) {
  if (detail::next_model_line(in, "header") != "#tagger v1")
    throw format_error("model file does not start with \"#tagger v1\"");

  TaggerModel model;
  model.meta.epochs = static_cast<std::uint32_t>(
      detail::parse_count_line(detail::next_model_line(in, "epochs"), "epochs"));
  model.meta.seed = detail::parse_count_line(detail::next_model_line(in, "seed"), "seed");
  model.meta.rare_threshold = detail::parse_count_line(
      detail::next_model_line(in, "rare_threshold"), "rare_threshold");

  const std::string augmentation_line = detail::next_model_line(in, "augmentation");
  if (augmentation_line.compare(0, 13, "augmentation\t") != 0)
    throw format_error("model file: expected \"augmentation\" line");
  try {
    model.meta.augmentation =
        mixture_from_json(nlohmann::json::parse(augmentation_line.substr(13))).mixture;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("model file: bad augmentation JSON: ") + e.what());
  }

  const std::uint64_t tag_count =
      detail::parse_count_line(detail::next_model_line(in, "tags"), "tags");
  model.tagset.reserve(tag_count);
  for (std::uint64_t t = 0; t < tag_count; ++t)
    model.tagset.push_back(detail::next_model_line(in, "a tag"));

  const std::uint64_t vocab_count =
      detail::parse_count_line(detail::next_model_line(in, "vocab"), "vocab");
  for (std::uint64_t v = 0; v < vocab_count; ++v) {
    const std::string line = detail::next_model_line(in, "a vocab entry");
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error("model file: vocab line \"" + line + "\" is not word<TAB>count");
    try {
      model.vocab[line.substr(0, tab)] = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw format_error("model file: bad count in vocab line \"" + line + "\"");
    }
  }

  const std::uint64_t weight_rows =
      detail::parse_count_line(detail::next_model_line(in, "weights"), "weights");
  for (std::uint64_t r = 0; r < weight_rows; ++r) {
    const std::string line = detail::next_model_line(in, "a weight row");
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos)
      throw format_error("model file: weight line \"" + line + "\" is not key<TAB>tag<TAB>value");
    std::uint32_t tag = 0;
    double value = 0.0;
    char* end = nullptr;
    try {
      tag = static_cast<std::uint32_t>(std::stoul(line.substr(tab1 + 1, tab2 - tab1 - 1)));
      value = std::strtod(line.c_str() + tab2 + 1, &end);
    } catch (const std::exception&) {
      throw format_error("model file: bad weight line \"" + line + "\"");
    }
    if (end == line.c_str() + tab2 + 1 || *end != '\0')
      throw format_error("model file: bad weight value in \"" + line + "\"");
    if (tag >= model.tagset.size())
      throw format_error("model file: weight row names tag index " + std::to_string(tag) +
                         " outside the tagset");
    model.weights[line.substr(0, tab1)].emplace_back(tag, value);
  }
  return model;
}

}  // namespace perturb
