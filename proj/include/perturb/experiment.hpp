#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/noise.hpp"
#include "perturb/rng.hpp"
#include "perturb/tagger.hpp"

// Train-noise x test-noise robustness matrices over the tagger, plus the
// flip-rate sweep specialization. Every cell's randomness is keyed by
// (experiment seed, condition name, role), so a cell's value does not depend
// on which other conditions the experiment happens to include.

namespace perturb {

struct Condition {
  std::string name;
  MixtureSpec mixture;
};

struct MatrixReport {
  std::vector<std::string> train_conditions;
  std::vector<std::string> test_conditions;
  std::vector<std::vector<double>> scores;  // means over repeats
  std::vector<std::vector<double>> stdevs;  // zero when repeats == 1
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  std::uint64_t rare_threshold = 0;
  std::uint32_t repeats = 1;
  std::string train_corpus_id;
  std::string test_corpus_id;

  bool operator==(const MatrixReport&) const = default;
};

namespace detail {

inline void require_unique_names(const std::vector<Condition>& conditions, const char* axis) {
  std::unordered_set<std::string> seen;
  for (const auto& condition : conditions)
    if (!seen.insert(condition.name).second)
      throw config_error(std::string("duplicate ") + axis + " condition name \"" +
                         condition.name + "\"");
}

inline std::uint64_t condition_seed(std::uint64_t seed, const char* role, const std::string& name) {
  return derive_seed(seed ^ fnv1a64(role), fnv1a64(name));
}

}  // namespace detail

// Trains one tagger per train condition (the condition's mixture becomes the
// augmentation) and evaluates it on the test corpus noised per test
// condition. Each test realization keeps the gold tags; repeats re-noise the
// test corpus on fresh substreams and report mean and sample stdev.
inline MatrixReport robustness_matrix(const TaggedCorpus& train_corpus,
                                      const TaggedCorpus& test_corpus,
                                      const std::vector<Condition>& train_conditions,
                                      const std::vector<Condition>& test_conditions,
                                      const TrainConfig& base, std::uint32_t repeats = 1) {
  if (train_conditions.empty() || test_conditions.empty())
    throw config_error("the matrix needs at least one train and one test condition");
  if (repeats < 1) throw config_error("repeats must be at least 1");
  detail::require_unique_names(train_conditions, "train");
  detail::require_unique_names(test_conditions, "test");
  for (const auto& condition : train_conditions) validate(condition.mixture);
  for (const auto& condition : test_conditions) validate(condition.mixture);

  const Corpus test_tokens = strip_tags(test_corpus);
  std::optional<Alphabet> alphabet;
  const bool any_flip = std::any_of(test_conditions.begin(), test_conditions.end(),
                                    [](const Condition& c) { return mixture_uses_flip(c.mixture); });
  if (any_flip) {
    Corpus all_tokens = strip_tags(train_corpus);
    all_tokens.insert(all_tokens.end(), test_tokens.begin(), test_tokens.end());
    alphabet = build_alphabet(all_tokens);
  }

  MatrixReport report;
  report.seed = base.seed;
  report.epochs = base.epochs;
  report.rare_threshold = base.rare_threshold;
  report.repeats = repeats;
  for (const auto& condition : train_conditions) report.train_conditions.push_back(condition.name);
  for (const auto& condition : test_conditions) report.test_conditions.push_back(condition.name);

  for (const auto& train_condition : train_conditions) {
    TrainConfig config = base;
    config.augmentation = train_condition.mixture;
    config.seed = detail::condition_seed(base.seed, "train-noise", train_condition.name);
    const TaggerModel model = train_tagger(train_corpus, config);

    std::vector<double> row_mean, row_stdev;
    for (const auto& test_condition : test_conditions) {
      const std::uint64_t cell_seed =
          detail::condition_seed(base.seed, "test-noise", test_condition.name);
      double sum = 0.0, sum_sq = 0.0;
      for (std::uint32_t r = 0; r < repeats; ++r) {
        const NoiseResult noised = noise_corpus(test_tokens, test_condition.mixture,
                                                derive_seed(cell_seed, r),
                                                alphabet ? &*alphabet : nullptr);
        TaggedCorpus realized;
        realized.reserve(test_corpus.size());
        for (std::size_t s = 0; s < test_corpus.size(); ++s)
          realized.push_back({noised.corpus[s], test_corpus[s].tags});
        const double accuracy = evaluate_tagger(model, realized);
        sum += accuracy;
        sum_sq += accuracy * accuracy;
      }
      const double mean = sum / repeats;
      double stdev = 0.0;
      if (repeats > 1) {
        const double variance = std::max(0.0, (sum_sq - sum * mean) / (repeats - 1));
        stdev = std::sqrt(variance);
      }
      row_mean.push_back(mean);
      row_stdev.push_back(stdev);
    }
    report.scores.push_back(std::move(row_mean));
    report.stdevs.push_back(std::move(row_stdev));
  }
  return report;
}

// "flip@10%" style label; the percentage drops trailing zeros.
inline std::string flip_condition_name(double rate) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "flip@%g%%", rate * 100.0);
  return buffer;
}

// Matrix specialization where every condition is a pure flip mixture at one
// of the given rates; rows are train rates, columns test rates.
inline MatrixReport flip_sweep(const TaggedCorpus& train_corpus, const TaggedCorpus& test_corpus,
                               const std::vector<double>& train_rates,
                               const std::vector<double>& test_rates, const TrainConfig& base,
                               std::uint32_t repeats = 1) {
  const auto to_conditions = [](const std::vector<double>& rates) {
    std::vector<Condition> conditions;
    for (double rate : rates) {
      if (!(rate >= 0.0 && rate <= 1.0)) throw config_error("flip rates must lie in [0,1]");
      conditions.push_back({flip_condition_name(rate),
                            {MixtureMode::cycle, {{flip_spec(rate), 1.0}}}});
    }
    return conditions;
  };
  return robustness_matrix(train_corpus, test_corpus, to_conditions(train_rates),
                           to_conditions(test_rates), base, repeats);
}

// --- Report rendering. TSV is the plot-ready grid; JSON carries the full
// structure including meta and round-trips through read_report.

inline void emit_tsv(std::ostream& out, const MatrixReport& report) {
  out << "test";
  for (const auto& name : report.test_conditions) out << '\t' << name;
  out << '\n';
  char cell[32];
  for (std::size_t i = 0; i < report.train_conditions.size(); ++i) {
    out << report.train_conditions[i];
    for (const double score : report.scores[i]) {
      std::snprintf(cell, sizeof cell, "%.4f", score);
      out << '\t' << cell;
    }
    out << '\n';
  }
  if (!out) throw io_error("write failure on matrix report");
}

inline nlohmann::json report_to_json(const MatrixReport& report) {
  nlohmann::json doc;
  doc["train_conditions"] = report.train_conditions;
  doc["test_conditions"] = report.test_conditions;
  doc["scores"] = report.scores;
  doc["stdevs"] = report.stdevs;
  doc["meta"] = {{"seed", report.seed},
                 {"epochs", report.epochs},
                 {"rare_threshold", report.rare_threshold},
                 {"repeats", report.repeats},
                 {"train_corpus", report.train_corpus_id},
                 {"test_corpus", report.test_corpus_id}};
  return doc;
}

inline void emit_json(std::ostream& out, const MatrixReport& report) {
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw io_error("write failure on matrix report");
}

inline MatrixReport read_report(const nlohmann::json& doc) {
  try {
    MatrixReport report;
    report.train_conditions = doc.at("train_conditions").get<std::vector<std::string>>();
    report.test_conditions = doc.at("test_conditions").get<std::vector<std::string>>();
    report.scores = doc.at("scores").get<std::vector<std::vector<double>>>();
    report.stdevs = doc.at("stdevs").get<std::vector<std::vector<double>>>();
    const auto& meta = doc.at("meta");
    report.seed = meta.at("seed").get<std::uint64_t>();
    report.epochs = meta.at("epochs").get<std::uint32_t>();
    report.rare_threshold = meta.at("rare_threshold").get<std::uint64_t>();
    report.repeats = meta.at("repeats").get<std::uint32_t>();
    report.train_corpus_id = meta.at("train_corpus").get<std::string>();
    report.test_corpus_id = meta.at("test_corpus").get<std::string>();
    if (report.scores.size() != report.train_conditions.size() ||
        report.stdevs.size() != report.train_conditions.size())
      throw format_error("matrix report grid does not match its train conditions");
    for (std::size_t i = 0; i < report.scores.size(); ++i)
      if (report.scores[i].size() != report.test_conditions.size() ||
          report.stdevs[i].size() != report.test_conditions.size())
        throw format_error("matrix report grid does not match its test conditions");
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("bad matrix report JSON: ") + e.what());
  }
}

// --- Experiment config document:
// {train_corpus, test_corpus, conditions:[{name, mixture}],
//  tagger:{epochs, rare_threshold}, seed, repeats}

struct ExperimentConfig {
  std::string train_corpus_path;
  std::string test_corpus_path;
  std::vector<Condition> train_conditions;
  std::vector<Condition> test_conditions;
  TrainConfig base;
  std::optional<std::uint64_t> seed;
  std::uint32_t repeats = 1;
};

inline ExperimentConfig experiment_from_json(const nlohmann::json& doc) {
  try {
    ExperimentConfig config;
    config.train_corpus_path = doc.at("train_corpus").get<std::string>();
    config.test_corpus_path = doc.at("test_corpus").get<std::string>();

    const auto parse_conditions = [](const nlohmann::json& list) {
      if (!list.is_array() || list.empty())
        throw config_error("conditions must be a non-empty array");
      std::vector<Condition> conditions;
      for (const auto& item : list) {
        Condition condition;
        condition.name = item.at("name").get<std::string>();
        if (condition.name.empty()) throw config_error("condition names must be non-empty");
        const MixtureDocument mixture = mixture_from_json(item.at("mixture"));
        if (mixture.seed)
          throw config_error("condition \"" + condition.name +
                             "\": mixtures inside conditions must not carry seeds");
        condition.mixture = mixture.mixture;
        conditions.push_back(std::move(condition));
      }
      return conditions;
    };

    if (doc.contains("conditions")) {
      config.train_conditions = parse_conditions(doc.at("conditions"));
      config.test_conditions = config.train_conditions;
    }
    if (doc.contains("train_conditions"))
      config.train_conditions = parse_conditions(doc.at("train_conditions"));
    if (doc.contains("test_conditions"))
      config.test_conditions = parse_conditions(doc.at("test_conditions"));
    if (config.train_conditions.empty() || config.test_conditions.empty())
      throw config_error("experiment config names no conditions");

    if (doc.contains("tagger")) {
      const auto& tagger = doc.at("tagger");
      if (tagger.contains("epochs")) config.base.epochs = tagger.at("epochs").get<std::uint32_t>();
      if (tagger.contains("rare_threshold"))
        config.base.rare_threshold = tagger.at("rare_threshold").get<std::uint64_t>();
    }
    if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("repeats")) config.repeats = doc.at("repeats").get<std::uint32_t>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("bad experiment config: ") + e.what());
  }
}

}  // namespace perturb
