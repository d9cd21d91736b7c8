// Command-line front end: every pipeline stage (noising, BPE, tagging,
// metrics, experiment matrices) as one subcommand of a single executable.
// Exit codes: 0 success, 1 validation or configuration problem, 2 I/O or
// file-format problem. Output files are written to a temp file and renamed
// into place so failures never leave partial output behind.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "perturb/perturb.hpp"

namespace {

using namespace perturb;

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    if (std::cin.bad()) throw io_error("read failure on stdin");
    return buffer.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open \"" + path + "\" for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw io_error("read failure on \"" + path + "\"");
  return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout.write(content.data(), static_cast<std::streamsize>(content.size()));
    std::cout.flush();
    if (!std::cout) throw io_error("write failure on stdout");
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open \"" + tmp + "\" for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw io_error("write failure on \"" + tmp + "\"");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw io_error("cannot move \"" + tmp + "\" into place as \"" + path + "\"");
  }
}

Corpus read_corpus_arg(const std::string& path) {
  std::istringstream in(slurp(path));
  return read_plain(in);
}

TaggedCorpus read_tagged_arg(const std::string& path) {
  std::istringstream in(slurp(path));
  return read_conllu(in);
}

bpe::MergeTable read_merges_arg(const std::string& path) {
  std::istringstream in(slurp(path));
  return bpe::read_merges(in);
}

// A mixture argument is either inline JSON (starts with "{") or a path to a
// JSON file.
MixtureDocument load_mixture_arg(const std::string& value) {
  std::string text = value;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text[first] != '{') text = slurp(value);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("mixture is not valid JSON: ") + e.what());
  }
  return mixture_from_json(doc);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           const std::optional<std::uint64_t>& document) {
  if (flag) return *flag;
  if (document) return *document;
  throw config_error("no seed given: pass --seed or put a \"seed\" in the JSON document");
}

struct NoiseArgs {
  std::string in, out, mixture, assignments;
  std::optional<std::uint64_t> seed;
};

void run_noise(const NoiseArgs& args) {
  const Corpus corpus = read_corpus_arg(args.in);
  const MixtureDocument document = load_mixture_arg(args.mixture);
  const std::uint64_t seed = resolve_seed(args.seed, document.seed);

  std::optional<Alphabet> alphabet;
  if (mixture_uses_flip(document.mixture)) alphabet = build_alphabet(corpus);
  const NoiseResult result =
      noise_corpus(corpus, document.mixture, seed, alphabet ? &*alphabet : nullptr);

  write_output(args.out, write_plain_string(result.corpus));
  if (!args.assignments.empty()) {
    std::ostringstream log;
    write_assignments(log, result.assignments);
    write_output(args.assignments, log.str());
  }
}

struct BpeLearnArgs {
  std::string in, merges_out;
  std::uint64_t num_merges = 0;
};

void run_bpe_learn(const BpeLearnArgs& args) {
  const Corpus corpus = read_corpus_arg(args.in);
  const bpe::MergeTable table = bpe::bpe_learn(count_tokens(corpus), args.num_merges);
  std::ostringstream out;
  bpe::write_merges(out, table);
  write_output(args.merges_out, out.str());
}

void run_bpe_apply(const std::string& in, const std::string& merges, const std::string& out) {
  const Corpus corpus = read_corpus_arg(in);
  const bpe::MergeTable table = read_merges_arg(merges);
  write_output(out, write_plain_string(bpe::segment_corpus(corpus, table)));
}

void run_bpe_decode(const std::string& in, const std::string& out) {
  write_output(out, write_plain_string(bpe::decode_corpus(read_corpus_arg(in))));
}

struct TagTrainArgs {
  std::string train, model_out, augment;
  std::uint32_t epochs = 5;
  std::uint64_t seed = 0;
  std::uint64_t rare_threshold = 10;
};

void run_tag_train(const TagTrainArgs& args) {
  const TaggedCorpus corpus = read_tagged_arg(args.train);
  TrainConfig config;
  config.epochs = args.epochs;
  config.seed = args.seed;
  config.rare_threshold = args.rare_threshold;
  if (!args.augment.empty()) {
    const MixtureDocument document = load_mixture_arg(args.augment);
    if (document.seed)
      throw config_error("the augmentation mixture must not carry a seed; use --seed");
    config.augmentation = document.mixture;
  }
  const TaggerModel model = train_tagger(corpus, config);
  std::ostringstream out;
  write_model(out, model);
  write_output(args.model_out, out.str());
}

void run_tag_eval(const std::string& model_path, const std::string& test_path) {
  std::istringstream model_in(slurp(model_path));
  const TaggerModel model = read_model(model_in);
  const TaggedCorpus test = read_tagged_arg(test_path);
  std::printf("accuracy\t%.4f\n", evaluate_tagger(model, test));
}

void run_bleu(const std::string& hyp_path, const std::string& ref_path) {
  const BleuScore bleu = corpus_bleu(read_corpus_arg(hyp_path), read_corpus_arg(ref_path));
  std::printf("BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%llu, ref_len=%llu)\n",
              bleu.score, 100.0 * bleu.precisions[0], 100.0 * bleu.precisions[1],
              100.0 * bleu.precisions[2], 100.0 * bleu.precisions[3], bleu.brevity_penalty,
              static_cast<double>(bleu.hyp_length) / static_cast<double>(bleu.ref_length),
              static_cast<unsigned long long>(bleu.hyp_length),
              static_cast<unsigned long long>(bleu.ref_length));
}

struct StatsArgs {
  std::string clean, noisy, merges, vocab;
};

void run_stats(const StatsArgs& args) {
  const Corpus clean = read_corpus_arg(args.clean);
  const Corpus noisy = read_corpus_arg(args.noisy);
  const bpe::MergeTable table = read_merges_arg(args.merges);
  const auto vocab = vocabulary_of(read_corpus_arg(args.vocab));
  const SegmentationDivergence stats = segmentation_divergence(clean, noisy, table, vocab);
  std::printf("mean_units_clean\t%.4f\n", stats.mean_units_clean);
  std::printf("mean_units_noisy\t%.4f\n", stats.mean_units_noisy);
  std::printf("changed_fraction\t%.4f\n", stats.changed_fraction);
  std::printf("unk_rate_clean\t%.4f\n", stats.unk_rate_clean);
  std::printf("unk_rate_noisy\t%.4f\n", stats.unk_rate_noisy);
}

struct MatrixArgs {
  std::string config, out, format = "tsv";
  std::optional<std::uint64_t> seed;
};

void run_matrix(const MatrixArgs& args) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(slurp(args.config));
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("experiment config is not valid JSON: ") + e.what());
  }
  ExperimentConfig config = experiment_from_json(doc);
  TrainConfig base = config.base;
  base.seed = resolve_seed(args.seed, config.seed);

  const TaggedCorpus train = read_tagged_arg(config.train_corpus_path);
  const TaggedCorpus test = read_tagged_arg(config.test_corpus_path);
  MatrixReport report = robustness_matrix(train, test, config.train_conditions,
                                          config.test_conditions, base, config.repeats);
  report.train_corpus_id = config.train_corpus_path;
  report.test_corpus_id = config.test_corpus_path;

  std::ostringstream out;
  if (args.format == "tsv") {
    emit_tsv(out, report);
  } else if (args.format == "json") {
    emit_json(out, report);
  } else {
    throw config_error("--format must be tsv or json");
  }
  write_output(args.out, out.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reproducible word-form perturbations, BPE segmentation, a perceptron tagger,"
               " and robustness-matrix experiments over text corpora.\n"
               "Every --in/--out style flag accepts \"-\" for stdin/stdout."};
  app.require_subcommand(1);

  NoiseArgs noise_args;
  auto* cmd_noise = app.add_subcommand("noise", "Apply seeded word-form noise to a corpus");
  cmd_noise->add_option("--in", noise_args.in, "Input corpus, one sentence per line")->required();
  cmd_noise->add_option("--out", noise_args.out, "Where to write the noised corpus")->required();
  cmd_noise
      ->add_option("--mixture", noise_args.mixture,
                   "Noise mixture: inline JSON or a path to a JSON file")
      ->required();
  cmd_noise->add_option("--seed", noise_args.seed,
                        "Random seed; overrides a \"seed\" in the mixture document");
  cmd_noise->add_option("--assignments", noise_args.assignments,
                        "Optional TSV log of the per-sentence noise assignment");
  cmd_noise->callback([&noise_args] { run_noise(noise_args); });

  BpeLearnArgs learn_args;
  auto* cmd_learn = app.add_subcommand("bpe-learn", "Learn BPE merges from a corpus");
  cmd_learn->add_option("--in", learn_args.in, "Training corpus")->required();
  cmd_learn->add_option("--merges-out", learn_args.merges_out, "Where to write the merge file")
      ->required();
  cmd_learn
      ->add_option("--num-merges", learn_args.num_merges,
                   "Number of merges to learn (2000 suits tagging-scale data, 50000 MT-scale)")
      ->required();
  cmd_learn->callback([&learn_args] { run_bpe_learn(learn_args); });

  std::string apply_in, apply_merges, apply_out;
  auto* cmd_apply = app.add_subcommand("bpe-apply", "Segment a corpus with learned merges");
  cmd_apply->add_option("--in", apply_in, "Input corpus")->required();
  cmd_apply->add_option("--merges", apply_merges, "Merge file from bpe-learn")->required();
  cmd_apply->add_option("--out", apply_out, "Where to write the segmented corpus")->required();
  cmd_apply->callback([&] { run_bpe_apply(apply_in, apply_merges, apply_out); });

  std::string decode_in, decode_out;
  auto* cmd_decode = app.add_subcommand("bpe-decode", "Undo BPE segmentation");
  cmd_decode->add_option("--in", decode_in, "Segmented corpus")->required();
  cmd_decode->add_option("--out", decode_out, "Where to write the decoded corpus")->required();
  cmd_decode->callback([&] { run_bpe_decode(decode_in, decode_out); });

  TagTrainArgs train_args;
  auto* cmd_train = app.add_subcommand("tag-train", "Train the averaged-perceptron tagger");
  cmd_train->add_option("--train", train_args.train, "Training treebank in CoNLL-U format")
      ->required();
  cmd_train->add_option("--model-out", train_args.model_out, "Where to write the model")
      ->required();
  cmd_train->add_option("--epochs", train_args.epochs, "Training epochs")->capture_default_str();
  cmd_train->add_option("--seed", train_args.seed, "Random seed for shuffling and augmentation")
      ->required();
  cmd_train->add_option("--augment", train_args.augment,
                        "Noise mixture applied to each epoch's inputs (inline JSON or a path)");
  cmd_train
      ->add_option("--rare-threshold", train_args.rare_threshold,
                   "Words seen fewer times than this get prefix/suffix features")
      ->capture_default_str();
  cmd_train->callback([&train_args] { run_tag_train(train_args); });

  std::string eval_model, eval_test;
  auto* cmd_eval = app.add_subcommand("tag-eval", "Evaluate a tagger model on a treebank");
  cmd_eval->add_option("--model", eval_model, "Model file from tag-train")->required();
  cmd_eval->add_option("--test", eval_test, "Test treebank in CoNLL-U format")->required();
  cmd_eval->callback([&] { run_tag_eval(eval_model, eval_test); });

  std::string bleu_hyp, bleu_ref;
  auto* cmd_bleu = app.add_subcommand("bleu", "Corpus BLEU of a hypothesis file against a reference");
  cmd_bleu->add_option("--hyp", bleu_hyp, "Hypothesis corpus, line-aligned with the reference")
      ->required();
  cmd_bleu->add_option("--ref", bleu_ref, "Reference corpus")->required();
  cmd_bleu->callback([&] { run_bleu(bleu_hyp, bleu_ref); });

  StatsArgs stats_args;
  auto* cmd_stats = app.add_subcommand(
      "stats", "Segmentation divergence and unknown-word rates between aligned corpora");
  cmd_stats->add_option("--clean", stats_args.clean, "Clean corpus")->required();
  cmd_stats->add_option("--noisy", stats_args.noisy, "Noised corpus, aligned with the clean one")
      ->required();
  cmd_stats->add_option("--merges", stats_args.merges, "Merge file from bpe-learn")->required();
  cmd_stats->add_option("--vocab", stats_args.vocab,
                        "Corpus whose tokens form the known-word vocabulary")
      ->required();
  cmd_stats->callback([&stats_args] { run_stats(stats_args); });

  MatrixArgs matrix_args;
  auto* cmd_matrix =
      app.add_subcommand("matrix", "Train-noise x test-noise robustness matrix for the tagger");
  cmd_matrix
      ->add_option("--config", matrix_args.config,
                   "Experiment config JSON: {train_corpus, test_corpus, conditions:[{name,"
                   " mixture}], tagger:{epochs, rare_threshold}, seed, repeats};"
                   " corpus paths resolve against the working directory")
      ->required();
  cmd_matrix->add_option("--out", matrix_args.out, "Where to write the report")->required();
  cmd_matrix->add_option("--format", matrix_args.format, "Report format: tsv or json")
      ->capture_default_str();
  cmd_matrix->add_option("--seed", matrix_args.seed,
                         "Random seed; overrides a \"seed\" in the config");
  cmd_matrix->callback([&matrix_args] { run_matrix(matrix_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const perturb::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const perturb::metric_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const perturb::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const perturb::format_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
