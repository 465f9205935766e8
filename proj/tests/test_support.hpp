// Shared test fixtures and independent oracles. Everything here recomputes
// expectations from first principles so the checks stay decoupled from the
// library's own code paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xsap/bitext.hpp"
#include "xsap/core.hpp"
#include "xsap/linker.hpp"
#include "xsap/matrix.hpp"
#include "xsap/mining.hpp"
#include "xsap/rng.hpp"

namespace testsup {

// ---------------------------------------------------------------------------
// random batches

inline xsap::Matrix random_unit_rows(xsap::Rng& rng, std::size_t n,
                                     std::size_t d) {
  xsap::Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = rng.uniform(-1.0, 1.0);
        m.at(i, j) = v;
        norm2 += v * v;
      }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j) m.at(i, j) *= inv;
  }
  return m;
}

inline std::vector<xsap::LabelId> labels_for_classes(std::size_t n_classes,
                                                     std::size_t per_class) {
  std::vector<xsap::LabelId> labels;
  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t k = 0; k < per_class; ++k)
      labels.push_back(xsap::LabelId{"C" + std::to_string(100 + c)});
  return labels;
}

inline std::vector<xsap::LabelId> random_labels(xsap::Rng& rng, std::size_t n,
                                                std::size_t n_classes) {
  std::vector<xsap::LabelId> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    labels.push_back(
        xsap::LabelId{"C" + std::to_string(100 + rng.bounded(n_classes))});
  return labels;
}

// ---------------------------------------------------------------------------
// mining oracle: direct O(N^3) enumeration of the margin inequality
//   d(a,p) + margin >= d(a,n)
// over all index triples, with the distance recomputed from the embeddings.

inline double oracle_distance(const xsap::Matrix& e, std::size_t i,
                              std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < e.cols; ++k) s += e.at(i, k) * e.at(j, k);
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * s));
}

inline std::vector<xsap::Triplet> brute_force_mine(
    const xsap::Matrix& embeddings, const std::vector<xsap::LabelId>& labels,
    double margin) {
  const std::size_t n = labels.size();
  std::vector<xsap::Triplet> out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t p = 0; p < n; ++p) {
      if (p == a || !(labels[p] == labels[a])) continue;
      for (std::size_t neg = 0; neg < n; ++neg) {
        if (labels[neg] == labels[a]) continue;
        if (oracle_distance(embeddings, a, p) + margin >=
            oracle_distance(embeddings, a, neg))
          out.push_back({static_cast<std::uint32_t>(a),
                         static_cast<std::uint32_t>(p),
                         static_cast<std::uint32_t>(neg)});
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// loss oracle: the formula transcribed term by term, no factoring, no reuse

inline double naive_ms_loss(const xsap::Matrix& s, const xsap::PairSets& pairs,
                            double alpha, double beta, double epsilon) {
  const std::size_t n = pairs.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double neg_sum = 0.0;
    for (const auto j : pairs.negatives[i])
      neg_sum += std::exp(alpha * (s.at(i, j) - epsilon));
    double pos_sum = 0.0;
    for (const auto j : pairs.positives[i])
      pos_sum += std::exp(-beta * (s.at(i, j) - epsilon));
    total += std::log(1.0 + neg_sum) / alpha + std::log(1.0 + pos_sum) / beta;
  }
  return total / static_cast<double>(n);
}

// relative error with an absolute floor so exactly-zero entries compare as 0
inline double rel_err(double a, double b, double floor_val = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_val});
}

// ---------------------------------------------------------------------------
// temp dirs for file round trips

class TmpDir {
 public:
  explicit TmpDir(const std::string& tag) {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("xsap_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const {
    return dir_ / name;
  }

 private:
  std::filesystem::path dir_;
};

// ---------------------------------------------------------------------------
// synthetic cross-lingual fixture
//
// A small world of concepts whose "English" synonyms share a stem, plus
// three pseudo-languages defined by deterministic vowel rotations. Held-out
// foreign names form the test sets; everything else is the candidate index.

inline char rotate_vowel(char c, int shift) {
  static constexpr char kVowels[] = {'a', 'e', 'i', 'o', 'u'};
  for (int v = 0; v < 5; ++v)
    if (kVowels[v] == c) return kVowels[(v + shift) % 5];
  return c;
}

inline std::string apply_transform(const std::string& word, int shift) {
  std::string out = word;
  for (char& c : out) c = rotate_vowel(c, shift);
  return out;
}

// pseudo-language codes and their vowel shifts
inline const std::vector<std::pair<std::string, int>>& pseudo_langs() {
  static const std::vector<std::pair<std::string, int>> langs = {
      {"xa", 1}, {"xb", 2}, {"xc", 3}};
  return langs;
}

// CV-syllable word, syllables in [min_syl, max_syl]
inline std::string random_word(xsap::Rng& rng, int min_syl, int max_syl) {
  static constexpr char kC[] = "ktmrsnlpdbgz";
  static constexpr char kV[] = "aeiou";
  const int syls =
      min_syl + static_cast<int>(rng.bounded(
                    static_cast<std::uint64_t>(max_syl - min_syl + 1)));
  std::string w;
  for (int s = 0; s < syls; ++s) {
    w.push_back(kC[rng.bounded(12)]);
    w.push_back(kV[rng.bounded(5)]);
  }
  return w;
}

struct TransferFixture {
  std::vector<xsap::NameRecord> en_train;   // English synonyms only
  std::vector<xsap::NameRecord> all_train;  // English + retained foreign names
  std::vector<xsap::NameRecord> index_records;  // candidate ontology
  std::map<std::string, std::vector<xsap::EvalExample>> tests;  // foreign only
  std::vector<xsap::NameRecord> bitext_records;  // pseudo-labelled word pairs
};

inline TransferFixture make_transfer_fixture(std::uint64_t seed,
                                             std::size_t n_concepts,
                                             std::size_t n_bitext_pairs) {
  xsap::Rng rng(seed);
  TransferFixture fx;
  std::set<std::string> used_names;

  for (std::size_t c = 0; c < n_concepts; ++c) {
    const xsap::LabelId cui{"C" + std::to_string(1000 + c)};
    // three English synonyms sharing a stem, globally unique
    std::vector<std::string> en_names;
    while (en_names.size() < 3) {
      const std::string stem = random_word(rng, 2, 3);
      en_names.clear();
      bool ok = true;
      for (int j = 0; j < 3 && ok; ++j) {
        const std::string name = stem + random_word(rng, 1, 2);
        if (used_names.count(name)) ok = false;
        en_names.push_back(name);
      }
      if (!ok || en_names[0] == en_names[1] || en_names[0] == en_names[2] ||
          en_names[1] == en_names[2])
        en_names.clear();
    }
    for (const auto& name : en_names) {
      used_names.insert(name);
      fx.en_train.push_back({name, cui, "en"});
    }
    // per language: two transformed synonyms; the first is held out as the
    // test query, the second joins the index and the all_syn training set
    for (const auto& [lang, shift] : pseudo_langs()) {
      const std::string held_out = apply_transform(en_names[0], shift);
      const std::string retained = apply_transform(en_names[1], shift);
      fx.tests[lang].push_back({"", held_out, cui, lang});
      fx.all_train.push_back({retained, cui, lang});
    }
  }
  fx.all_train.insert(fx.all_train.end(), fx.en_train.begin(),
                      fx.en_train.end());
  fx.index_records = fx.all_train;

  // general-domain word pairs, split round-robin across the languages
  std::uint64_t label_index = 0;
  for (std::size_t i = 0; i < n_bitext_pairs; ++i) {
    const auto& [lang, shift] = pseudo_langs()[i % pseudo_langs().size()];
    const std::string word = random_word(rng, 2, 4);
    const xsap::LabelId label{"EN" + xsap::upper2(lang) +
                              std::to_string(++label_index)};
    fx.bitext_records.push_back({word, label, "en"});
    fx.bitext_records.push_back({apply_transform(word, shift), label, lang});
  }
  return fx;
}

// config tuned for the second-scale synthetic world; the loss/mining
// hyperparameters stay at the reference operating point
inline xsap::TrainConfig transfer_config(std::uint64_t seed) {
  xsap::TrainConfig cfg;
  cfg.batch_size = 128;
  cfg.names_per_class = 2;
  cfg.learning_rate = 1.0;
  cfg.epochs = 25;
  cfg.embed_dim = 48;
  cfg.ngram_order = 2;
  cfg.vocab_size = 4096;
  cfg.seed = seed;
  return cfg;
}

// mean foreign-language P@1 of an encoder over the fixture's test sets
inline double foreign_p1(const xsap::EncoderParams& params,
                         const TransferFixture& fx) {
  const auto index = xsap::build_index(params, fx.index_records);
  const auto report = xsap::evaluate(params, index, fx.tests);
  return report.avg.p1;
}

}  // namespace testsup
