#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/io.hpp"
#include "xsap/linker.hpp"
#include "xsap/rng.hpp"
#include "xsap/text.hpp"

namespace xsap {

// One hyperlinked surface form in context.
struct MentionOccurrence {
  std::string lang;
  std::string sentence;
  std::string mention;
  std::string page_title;
};

// page title -> CUI, titles NFC-normalized at load. Titles are unique
// within a language.
using TitleCuiMap = std::unordered_map<std::string, LabelId>;

// `lang<TAB>sentence<TAB>mention<TAB>page_title`
inline std::vector<MentionOccurrence> read_occurrences(std::istream& in) {
  std::vector<MentionOccurrence> out;
  std::string line;
  std::size_t lineno = 0;
  while (get_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 4)
      throw std::runtime_error("occurrences: line " + std::to_string(lineno) +
                               ": expected 4 tab-separated fields");
    MentionOccurrence occ{std::string(parts[0]), std::string(parts[1]),
                          std::string(parts[2]), std::string(parts[3])};
    if (occ.mention.empty() || occ.page_title.empty())
      throw std::runtime_error("occurrences: line " + std::to_string(lineno) +
                               ": empty mention or title");
    out.push_back(std::move(occ));
  }
  return out;
}

// `title<TAB>cui`
inline TitleCuiMap read_title_map(std::istream& in) {
  TitleCuiMap map;
  std::string line;
  std::size_t lineno = 0;
  while (get_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 2)
      throw std::runtime_error("title map: line " + std::to_string(lineno) +
                               ": expected 2 tab-separated fields");
    map[nfc(parts[0])] = LabelId{std::string(parts[1])};
  }
  return map;
}

struct LinkStats {
  std::uint64_t unmapped = 0;
};

// Joins occurrences to concepts: keeps those whose page title is in the
// map, emitting (sentence, mention, CUI, lang). Input order preserved;
// unmapped titles are counted, not errors.
inline std::vector<EvalExample> link_mentions(
    const std::vector<MentionOccurrence>& occurrences, const TitleCuiMap& map,
    LinkStats* stats_out = nullptr) {
  std::vector<EvalExample> out;
  LinkStats stats;
  for (const auto& occ : occurrences) {
    const auto it = map.find(nfc(occ.page_title));
    if (it == map.end()) {
      ++stats.unmapped;
      continue;
    }
    out.push_back({occ.sentence, occ.mention, it->second, occ.lang});
  }
  if (stats_out) *stats_out = stats;
  return out;
}

// Keeps the first occurrence of each NFC-normalized mention string per
// language; order preserved.
inline std::vector<EvalExample> dedup_surface_forms(
    const std::vector<EvalExample>& examples) {
  std::vector<EvalExample> out;
  std::unordered_set<std::string> seen;
  for (const auto& ex : examples) {
    std::string key = ex.lang + "\x1f" + nfc(ex.mention);
    if (seen.insert(std::move(key)).second) out.push_back(ex);
  }
  return out;
}

// Drops examples whose mention has the same surface form as the page it
// links to: NFC-exact match of the mention against a map title carrying the
// example's own CUI. No case folding.
inline std::vector<EvalExample> filter_mention_equals_title(
    const std::vector<EvalExample>& examples, const TitleCuiMap& map) {
  std::vector<EvalExample> out;
  for (const auto& ex : examples) {
    const auto it = map.find(nfc(ex.mention));
    if (it != map.end() && it->second == ex.gold_cui) continue;
    out.push_back(ex);
  }
  return out;
}

// Uniform sample of n examples without replacement, deterministic per seed;
// output sorted by (mention, cui) for stable files.
inline std::vector<EvalExample> sample_test_set(
    const std::vector<EvalExample>& examples, std::size_t n,
    std::uint64_t seed) {
  if (examples.size() < n)
    throw std::runtime_error("sample_test_set: need " + std::to_string(n) +
                             " examples, have " +
                             std::to_string(examples.size()));
  Rng rng(seed);
  const auto picks = rng.sample_indices(
      static_cast<std::uint32_t>(examples.size()), static_cast<std::uint32_t>(n));
  std::vector<EvalExample> out;
  out.reserve(n);
  for (const auto i : picks) out.push_back(examples[i]);
  std::sort(out.begin(), out.end(), [](const EvalExample& a, const EvalExample& b) {
    if (a.mention != b.mention) return a.mention < b.mention;
    return a.gold_cui.value < b.gold_cui.value;
  });
  return out;
}

// Key statistics of one language's pipeline: distinct sentences holding
// linked mentions, distinct linked page titles, linked mention count, count
// after surface-form dedup, count after the mention != title filter.
struct LangPipelineCounts {
  std::uint64_t sentences = 0;
  std::uint64_t unique_titles = 0;
  std::uint64_t mentions = 0;
  std::uint64_t unique_mentions = 0;
  std::uint64_t unique_mentions_filtered = 0;
};

using PipelineStats = std::map<std::string, LangPipelineCounts>;

struct BenchmarkResult {
  std::map<std::string, std::vector<EvalExample>> test_sets;
  PipelineStats stats;
};

// Full per-language pipeline: link -> dedup surface forms -> drop
// mention == title -> sample n (n = 0 keeps everything). Languages run
// independently; stages within a language are order-dependent
// (first-occurrence dedup).
inline BenchmarkResult build_benchmark(
    const std::vector<MentionOccurrence>& occurrences, const TitleCuiMap& map,
    std::size_t n, std::uint64_t seed, LinkStats* link_stats = nullptr) {
  // split by language, preserving order within each
  std::map<std::string, std::vector<MentionOccurrence>> by_lang;
  for (const auto& occ : occurrences) by_lang[occ.lang].push_back(occ);

  BenchmarkResult result;
  LinkStats total_link;
  for (const auto& [lang, occ] : by_lang) {
    LinkStats ls;
    const auto linked = link_mentions(occ, map, &ls);
    total_link.unmapped += ls.unmapped;
    const auto deduped = dedup_surface_forms(linked);
    const auto filtered = filter_mention_equals_title(deduped, map);

    LangPipelineCounts counts;
    // sentence/title sets are counted over linked occurrences only
    std::set<std::string> sentences, titles;
    for (const auto& o : occ) {
      if (map.count(nfc(o.page_title))) {
        sentences.insert(nfc(o.sentence));
        titles.insert(nfc(o.page_title));
      }
    }
    counts.sentences = sentences.size();
    counts.unique_titles = titles.size();
    counts.mentions = linked.size();
    counts.unique_mentions = deduped.size();
    counts.unique_mentions_filtered = filtered.size();
    result.stats.emplace(lang, counts);

    result.test_sets.emplace(
        lang, n == 0 ? filtered : sample_test_set(filtered, n, seed));
  }
  if (link_stats) *link_stats = total_link;
  return result;
}

// Stage counts without sampling.
inline PipelineStats pipeline_stats(
    const std::vector<MentionOccurrence>& occurrences, const TitleCuiMap& map) {
  return build_benchmark(occurrences, map, 0, 0).stats;
}

// TSV mirror of the per-language statistics table.
inline std::string format_stats_tsv(const PipelineStats& stats) {
  std::ostringstream out;
  out << "lang\tsentences\tunique_titles\tmentions\tunique_mentions"
         "\tunique_mentions_filtered\n";
  for (const auto& [lang, c] : stats)
    out << lang << '\t' << c.sentences << '\t' << c.unique_titles << '\t'
        << c.mentions << '\t' << c.unique_mentions << '\t'
        << c.unique_mentions_filtered << '\n';
  return out.str();
}

}  // namespace xsap
