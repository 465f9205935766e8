#pragma once

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <istream>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/encoder.hpp"
#include "xsap/io.hpp"
#include "xsap/matrix.hpp"

namespace xsap {

// Embedded ontology vocabulary: parallel (name, CUI) lists plus unit-norm
// rows, in input order. Immutable once built; queries are read-only.
struct CandidateIndex {
  std::vector<std::string> names;
  std::vector<LabelId> cuis;
  Matrix embeddings;  // M x d

  std::size_t size() const { return names.size(); }
};

inline CandidateIndex build_index(const EncoderParams& params,
                                  const std::vector<NameRecord>& ontology) {
  if (ontology.empty()) throw std::runtime_error("build_index: empty ontology");
  CandidateIndex index;
  index.names.reserve(ontology.size());
  index.cuis.reserve(ontology.size());
  index.embeddings = Matrix(ontology.size(), params.embed_dim);
  for (std::size_t i = 0; i < ontology.size(); ++i) {
    index.names.push_back(ontology[i].name);
    index.cuis.push_back(ontology[i].label);
    const Embedding e = encode(params, ontology[i].name);
    std::copy(e.begin(), e.end(), index.embeddings.row(i).begin());
  }
  return index;
}

// A mention with its gold concept. The sentence is carried through but not
// used for ranking; mentions are treated out of context.
struct EvalExample {
  std::string sentence;
  std::string mention;
  LabelId gold_cui;
  std::string lang;

  bool operator==(const EvalExample&) const = default;
};

struct RankedEntry {
  std::string name;
  LabelId cui;
  double similarity = 0.0;
};

struct RankedResult {
  std::string mention;
  std::vector<RankedEntry> entries;  // top-k names, similarity non-increasing
  // CUIs of the ranking deduplicated in rank order, collected past the k-th
  // name until k distinct concepts are found (so P@k is well defined even
  // when one concept's synonyms crowd the top).
  std::vector<LabelId> predicted_cuis;
};

namespace detail {

// indices of the top-t rows by (similarity desc, index asc)
inline std::vector<std::uint32_t> top_indices(const std::vector<double>& sims,
                                              std::size_t t) {
  std::vector<std::uint32_t> idx(sims.size());
  std::iota(idx.begin(), idx.end(), 0u);
  const auto cmp = [&](std::uint32_t a, std::uint32_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  };
  t = std::min(t, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t),
                    idx.end(), cmp);
  idx.resize(t);
  return idx;
}

}  // namespace detail

// Exhaustive nearest-neighbour ranking of a query embedding against every
// candidate: top-k names by dot product, ties broken by ascending index.
// k > M is clamped to M with a warning.
inline RankedResult rank_by_embedding(const CandidateIndex& index,
                                      std::span<const double> query,
                                      std::size_t k) {
  if (k == 0) throw std::runtime_error("rank: k must be >= 1");
  const std::size_t m = index.size();
  if (m == 0) throw std::runtime_error("rank: empty index");
  if (k > m) {
    std::cerr << "warning: rank k=" << k << " clamped to index size " << m
              << "\n";
    k = m;
  }
  std::vector<double> sims(m);
  for (std::size_t i = 0; i < m; ++i)
    sims[i] = dot(index.embeddings.row(i), query);

  RankedResult result;
  // grow the scanned prefix until it yields k distinct CUIs (or the whole
  // index is scanned)
  std::size_t t = std::max<std::size_t>(k, 16);
  std::vector<std::uint32_t> order;
  std::unordered_set<std::string> seen;
  while (true) {
    t = std::min(t, m);
    order = detail::top_indices(sims, t);
    seen.clear();
    result.predicted_cuis.clear();
    for (const auto i : order) {
      if (seen.insert(index.cuis[i].value).second) {
        result.predicted_cuis.push_back(index.cuis[i]);
        if (result.predicted_cuis.size() == k) break;
      }
    }
    if (result.predicted_cuis.size() == k || t == m) break;
    t *= 4;
  }
  result.entries.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto i = order[r];
    result.entries.push_back({index.names[i], index.cuis[i], sims[i]});
  }
  return result;
}

inline RankedResult rank(const CandidateIndex& index, const std::string& query,
                         const EncoderParams& params, std::size_t k) {
  const Embedding q = encode(params, query);
  RankedResult result = rank_by_embedding(index, q, k);
  result.mention = query;
  return result;
}

// Fraction of queries whose gold CUI appears within the first k entries of
// predicted_cuis.
inline double precision_at_k(const std::vector<RankedResult>& results,
                             const std::vector<LabelId>& golds, std::size_t k) {
  if (results.size() != golds.size())
    throw std::runtime_error("precision_at_k: results/golds length mismatch");
  if (results.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t q = 0; q < results.size(); ++q) {
    const auto& cuis = results[q].predicted_cuis;
    const std::size_t depth = std::min(k, cuis.size());
    for (std::size_t r = 0; r < depth; ++r)
      if (cuis[r] == golds[q]) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

struct LangMetrics {
  double p1 = 0.0;
  double p5 = 0.0;
  std::uint64_t n = 0;
};

struct EvalReport {
  std::map<std::string, LangMetrics> per_lang;  // sorted by language code
  LangMetrics avg;                              // unweighted macro average
};

// Per-language Precision@1/@5 plus the unweighted macro average. Languages
// with empty test sets are reported with n = 0 and excluded from the
// average.
inline EvalReport evaluate(
    const EncoderParams& params, const CandidateIndex& index,
    const std::map<std::string, std::vector<EvalExample>>& test_sets,
    std::size_t k = 5) {
  EvalReport report;
  k = std::max<std::size_t>(k, 5);
  double sum1 = 0.0, sum5 = 0.0;
  std::uint64_t langs_counted = 0;
  for (const auto& [lang, examples] : test_sets) {
    LangMetrics m;
    m.n = examples.size();
    if (!examples.empty()) {
      std::vector<RankedResult> results;
      std::vector<LabelId> golds;
      results.reserve(examples.size());
      golds.reserve(examples.size());
      for (const auto& ex : examples) {
        results.push_back(rank(index, ex.mention, params,
                               std::min(k, index.size())));
        golds.push_back(ex.gold_cui);
      }
      m.p1 = precision_at_k(results, golds, 1);
      m.p5 = precision_at_k(results, golds, 5);
      sum1 += m.p1;
      sum5 += m.p5;
      ++langs_counted;
    }
    report.avg.n += m.n;
    report.per_lang.emplace(lang, m);
  }
  if (langs_counted > 0) {
    report.avg.p1 = sum1 / static_cast<double>(langs_counted);
    report.avg.p5 = sum5 / static_cast<double>(langs_counted);
  }
  return report;
}

// Metrics report: one tab-separated row per language plus the macro
// average, fixed six-decimal formatting and stable key order for diffing.
inline std::string format_metrics(const EvalReport& report) {
  std::ostringstream out;
  out << "lang\tp_at_1\tp_at_5\tn\n";
  char buf[64];
  const auto row = [&](const std::string& lang, const LangMetrics& m) {
    std::snprintf(buf, sizeof(buf), "%.6f\t%.6f", m.p1, m.p5);
    out << lang << '\t' << buf << '\t' << m.n << '\n';
  };
  for (const auto& [lang, m] : report.per_lang) row(lang, m);
  row("avg", report.avg);
  return out.str();
}

// Test-set format: `sentence<TAB>mention<TAB>cui`, one file per language.
inline std::vector<EvalExample> read_test_set(std::istream& in,
                                              const std::string& lang) {
  std::vector<EvalExample> examples;
  std::string line;
  std::size_t lineno = 0;
  while (get_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3)
      throw std::runtime_error("test set: line " + std::to_string(lineno) +
                               ": expected 3 tab-separated fields");
    if (parts[1].empty())
      throw std::runtime_error("test set: line " + std::to_string(lineno) +
                               ": empty mention");
    examples.push_back({std::string(parts[0]), std::string(parts[1]),
                        LabelId{std::string(parts[2])}, lang});
  }
  return examples;
}

inline std::string format_test_set(const std::vector<EvalExample>& examples) {
  std::ostringstream out;
  for (const auto& ex : examples)
    out << ex.sentence << '\t' << ex.mention << '\t' << ex.gold_cui.value
        << '\n';
  return out.str();
}

}  // namespace xsap
