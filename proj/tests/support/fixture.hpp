#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perturb/corpus.hpp"
#include "perturb/rng.hpp"
#include "perturb/unicode.hpp"

// Deterministic synthetic treebank for tests: templated English-like
// sentences whose tags follow learnable context and suffix patterns
// (plural -s, past -ed, gerund -ing, adverb -ly), with noun/verb-ambiguous
// stems, digits, symbols, and capitalized proper nouns. Small enough to
// train the tagger in seconds, regular enough that character noise visibly
// damages the cues.

namespace fixture {

using perturb::TaggedCorpus;
using perturb::TaggedSentence;
using perturb::Token;

namespace detail {

struct Lex {
  const char* form;
  const char* tag;
};

inline const std::vector<Lex>& determiners() {
  static const std::vector<Lex> items = {
      {"the", "DET|Definite=Def"},   {"a", "DET|Definite=Ind"},
      {"this", "DET|PronType=Dem"},  {"that", "DET|PronType=Dem"},
      {"these", "DET|PronType=Dem"}, {"each", "DET|_"},
      {"every", "DET|_"},            {"some", "DET|_"},
  };
  return items;
}

inline const std::vector<Lex>& pronouns() {
  static const std::vector<Lex> items = {
      {"we", "PRON|Person=1"},  {"i", "PRON|Person=1"},  {"they", "PRON|Person=3"},
      {"she", "PRON|Person=3"}, {"he", "PRON|Person=3"}, {"it", "PRON|Person=3"},
  };
  return items;
}

inline const std::vector<Lex>& adpositions() {
  static const std::vector<Lex> items = {
      {"in", "ADP|_"},   {"on", "ADP|_"},    {"at", "ADP|_"},   {"with", "ADP|_"},
      {"from", "ADP|_"}, {"under", "ADP|_"}, {"over", "ADP|_"}, {"near", "ADP|_"},
      {"behind", "ADP|_"},
  };
  return items;
}

inline const std::vector<Lex>& conjunctions() {
  static const std::vector<Lex> items = {{"and", "CCONJ|_"}, {"or", "CCONJ|_"}, {"but", "CCONJ|_"}};
  return items;
}

inline const std::vector<Lex>& auxiliaries() {
  static const std::vector<Lex> items = {
      {"is", "AUX|Number=Sing"}, {"was", "AUX|Number=Sing"},
      {"are", "AUX|Number=Plur"}, {"were", "AUX|Number=Plur"},
  };
  return items;
}

inline const std::vector<Lex>& proper_nouns() {
  static const std::vector<Lex> items = {
      {"Paris", "PROPN|_"},  {"Berlin", "PROPN|_"}, {"Tokyo", "PROPN|_"},
      {"Maria", "PROPN|_"},  {"Anya", "PROPN|_"},   {"Kofi", "PROPN|_"},
      {"Ibrahim", "PROPN|_"}, {"Lena", "PROPN|_"},  {"Tande", "PROPN|_"},
      {"Soren", "PROPN|_"},
  };
  return items;
}

inline const std::vector<const char*>& noun_stems() {
  static const std::vector<const char*> items = {
      "time",    "report",  "order",   "charge", "study",  "answer", "market", "garden",
      "table",   "letter",  "river",   "window", "teacher", "student", "doctor", "farmer",
      "village", "city",    "road",    "bridge", "house",  "door",   "tree",   "flower",
      "bird",    "horse",   "train",   "engine", "wheel",  "book",   "page",   "word",
      "story",   "song",    "picture", "worker", "player", "driver", "leader", "reader",
      "writer",  "singer",  "corner",  "basket", "bottle", "candle", "ladder", "hammer",
  };
  return items;
}

inline const std::vector<const char*>& verb_stems() {
  static const std::vector<const char*> items = {
      "report", "order",  "charge", "study",  "answer", "walk",   "talk",  "jump",
      "play",   "work",   "open",   "follow", "visit",  "watch",  "help",  "call",
      "turn",   "push",   "pull",   "carry",  "clean",  "cook",   "paint", "plant",
      "build",  "learn",  "start",  "finish", "repair", "deliver",
  };
  return items;
}

inline const std::vector<const char*>& adjective_stems() {
  static const std::vector<const char*> items = {
      "small", "old",   "young", "new",    "tall",   "dark",  "warm",  "cold",
      "quick", "slow",  "quiet", "loud",   "clever", "simple", "bright", "heavy",
      "clean", "plain", "broad", "narrow",
  };
  return items;
}

inline const std::vector<const char*>& adverb_stems() {
  static const std::vector<const char*> items = {
      "quick", "slow", "quiet", "loud", "warm", "cold", "bright", "simple", "plain",
  };
  return items;
}

inline const std::vector<Lex>& number_words() {
  static const std::vector<Lex> items = {
      {"two", "NUM|NumForm=Word"},  {"three", "NUM|NumForm=Word"},
      {"five", "NUM|NumForm=Word"}, {"seven", "NUM|NumForm=Word"},
      {"nine", "NUM|NumForm=Word"}, {"twelve", "NUM|NumForm=Word"},
  };
  return items;
}

class Builder {
 public:
  explicit Builder(std::uint64_t seed) : rng_(seed) {}

  TaggedCorpus build(std::size_t sentences) {
    TaggedCorpus corpus;
    corpus.reserve(sentences);
    for (std::size_t i = 0; i < sentences; ++i) corpus.push_back(make_sentence());
    return corpus;
  }

 private:
  perturb::RngStream rng_;
  TaggedSentence sentence_;

  std::uint64_t below(std::uint64_t k) { return rng_.below(k); }
  bool coin() { return below(2) == 1; }

  void emit(const std::string& form, const std::string& tag) {
    sentence_.tokens.push_back(perturb::decode_utf8(form));
    sentence_.tags.push_back(tag);
  }

  void emit(const Lex& lex) { emit(lex.form, lex.tag); }

  const Lex& pick(const std::vector<Lex>& items) { return items[below(items.size())]; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  void noun(bool plural) {
    const std::string stem = pick(noun_stems());
    if (plural)
      emit(stem + "s", "NOUN|Number=Plur");
    else
      emit(stem, "NOUN|Number=Sing");
  }

  void noun() { noun(coin()); }

  // Present-tense forms reuse the plural -s and the bare stem, so several
  // surface forms are noun/verb ambiguous on purpose.
  void verb_present() { emit(std::string(pick(verb_stems())) + "s", "VERB|Tense=Pres"); }
  void verb_past() { emit(std::string(pick(verb_stems())) + "ed", "VERB|Tense=Past"); }
  void verb_gerund() { emit(std::string(pick(verb_stems())) + "ing", "VERB|VerbForm=Ger"); }
  void verb_infinitive() { emit(pick(verb_stems()), "VERB|VerbForm=Inf"); }

  void finite_verb() {
    if (coin())
      verb_present();
    else
      verb_past();
  }

  void adjective() {
    const std::string stem = pick(adjective_stems());
    if (below(4) == 0)
      emit(stem + "er", "ADJ|Degree=Cmp");
    else
      emit(stem, "ADJ|Degree=Pos");
  }

  void adverb() { emit(std::string(pick(adverb_stems())) + "ly", "ADV|_"); }

  void number() {
    if (coin()) {
      emit(pick(number_words()));
    } else if (coin()) {
      emit(std::to_string(below(90) + 10), "NUM|NumForm=Digit");
    } else {
      emit(std::to_string(below(20) + 1) + "." + std::to_string(below(90) + 10),
           "NUM|NumForm=Digit");
    }
  }

  void price() {
    number();
    emit(coin() ? "$" : "%", "SYM|_");
  }

  void stop() {
    const std::uint64_t roll = below(4);
    if (roll == 0)
      emit("!", "PUNCT|_");
    else if (roll == 1)
      emit("?", "PUNCT|_");
    else
      emit(".", "PUNCT|_");
  }

  TaggedSentence make_sentence() {
    sentence_ = TaggedSentence{};
    switch (below(12)) {
      case 0:
        emit(pick(determiners()));
        if (coin()) adjective();
        noun();
        finite_verb();
        if (coin()) adverb();
        break;
      case 1:
        emit(pick(proper_nouns()));
        finite_verb();
        emit(pick(determiners()));
        noun();
        emit(pick(adpositions()));
        emit(pick(determiners()));
        noun();
        break;
      case 2:
        emit(pick(pronouns()));
        finite_verb();
        emit(pick(determiners()));
        if (coin()) adjective();
        noun();
        break;
      case 3:
        emit(pick(determiners()));
        noun();
        emit(pick(adpositions()));
        emit(pick(determiners()));
        noun();
        finite_verb();
        adverb();
        break;
      case 4:
        emit(pick(determiners()));
        noun(false);
        verb_present();
        number();
        noun(true);
        break;
      case 5:
        emit(pick(proper_nouns()));
        emit(pick(conjunctions()));
        emit(pick(proper_nouns()));
        finite_verb();
        emit(pick(determiners()));
        noun();
        break;
      case 6:
        emit(pick(determiners()));
        if (coin()) adjective();
        noun();
        finite_verb();
        emit(pick(adpositions()));
        price();
        break;
      case 7:
        emit(pick(pronouns()));
        emit(pick(auxiliaries()));
        adverb();
        adjective();
        break;
      case 8:
        emit(pick(determiners()));
        noun();
        emit(",", "PUNCT|_");
        emit(pick(conjunctions()));
        emit(pick(determiners()));
        noun();
        finite_verb();
        break;
      case 9:
        number();
        noun(true);
        verb_past();
        emit(pick(adpositions()));
        emit(pick(determiners()));
        noun();
        break;
      case 10:
        emit(pick(proper_nouns()));
        verb_present();
        emit("to", "PART|_");
        verb_infinitive();
        emit(pick(determiners()));
        noun();
        break;
      default:
        emit(pick(determiners()));
        noun();
        emit(pick(auxiliaries()));
        verb_gerund();
        if (coin()) adverb();
        break;
    }
    stop();
    return sentence_;
  }
};

}  // namespace detail

// Deterministic corpus of templated tagged sentences.
inline TaggedCorpus make_corpus(std::size_t sentences, std::uint64_t seed) {
  return detail::Builder(seed).build(sentences);
}

// Renders a tagged corpus in the 10-column CoNLL-U layout the reader
// consumes: UPOS is the tag up to the first '|', FEATS the remainder.
inline std::string to_conllu(const TaggedCorpus& corpus) {
  std::string out;
  for (const auto& sentence : corpus) {
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const std::string form = perturb::encode_utf8(sentence.tokens[i]);
      const std::string& tag = sentence.tags[i];
      const auto bar = tag.find('|');
      const std::string upos = tag.substr(0, bar);
      const std::string feats = bar == std::string::npos ? "_" : tag.substr(bar + 1);
      out += std::to_string(i + 1);
      out += '\t';
      out += form;
      out += "\t_\t";
      out += upos;
      out += "\t_\t";
      out += feats;
      out += "\t0\tdep\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

}  // namespace fixture
