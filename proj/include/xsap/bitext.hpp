#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/io.hpp"

namespace xsap {

// A word- or phrase-level translation pair.
struct TranslationPair {
  std::string src_name;
  std::string tgt_name;
  std::string src_lang;
  std::string tgt_lang;

  bool operator==(const TranslationPair&) const = default;
};

struct BitextStats {
  std::uint64_t lines = 0;
  std::uint64_t skipped = 0;  // blank or malformed
};

// Word dictionaries: `source<SPACE or TAB>target`, one pair per line.
inline std::vector<TranslationPair> parse_word_translations(
    std::istream& in, const std::string& src_lang, const std::string& tgt_lang,
    BitextStats* stats_out = nullptr) {
  std::vector<TranslationPair> pairs;
  BitextStats stats;
  std::string line;
  while (get_line(in, line)) {
    ++stats.lines;
    const std::string_view sv = trim(line);
    if (sv.empty()) {
      ++stats.skipped;
      continue;
    }
    auto sep = sv.find_first_of(" \t");
    if (sep == std::string_view::npos) {
      ++stats.skipped;
      continue;
    }
    const auto src = trim(sv.substr(0, sep));
    const auto tgt = trim(sv.substr(sep + 1));
    if (src.empty() || tgt.empty()) {
      ++stats.skipped;
      continue;
    }
    pairs.push_back({std::string(src), std::string(tgt), src_lang, tgt_lang});
  }
  if (in.bad()) throw std::runtime_error("bitext: stream read error");
  if (stats_out) *stats_out = stats;
  return pairs;
}

// Parallel article titles: `source_title<TAB>target_title`. Tab is the only
// separator, so multi-word phrases survive intact.
inline std::vector<TranslationPair> parse_title_pairs(
    std::istream& in, const std::string& src_lang, const std::string& tgt_lang,
    BitextStats* stats_out = nullptr) {
  std::vector<TranslationPair> pairs;
  BitextStats stats;
  std::string line;
  while (get_line(in, line)) {
    ++stats.lines;
    const auto sep = line.find('\t');
    if (sep == std::string::npos) {
      ++stats.skipped;
      continue;
    }
    const auto src = trim(std::string_view(line).substr(0, sep));
    const auto tgt = trim(std::string_view(line).substr(sep + 1));
    if (src.empty() || tgt.empty()) {
      ++stats.skipped;
      continue;
    }
    pairs.push_back({std::string(src), std::string(tgt), src_lang, tgt_lang});
  }
  if (in.bad()) throw std::runtime_error("bitext: stream read error");
  if (stats_out) *stats_out = stats;
  return pairs;
}

inline std::string upper2(std::string_view lang) {
  std::string out(lang);
  for (char& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return out;
}

// Pseudo-label for the index-th pair of a (src, tgt) stream, 1-based:
// (en, de, 2344) -> "ENDE2344". An optional marker letter after the language
// codes keeps labels of two concatenated streams (titles + dictionary) from
// colliding: (en, de, 'M', 17) -> "ENDEM17".
inline LabelId pseudo_label(std::string_view src_lang, std::string_view tgt_lang,
                            std::uint64_t index, char marker = '\0') {
  std::string v = upper2(src_lang) + upper2(tgt_lang);
  if (marker != '\0') v.push_back(marker);
  v += std::to_string(index);
  return LabelId{v};
}

// Drops pairs either side of which would not survive record validation
// (invalid UTF-8, embedded tab/newline, empty after NFC+trim), so that every
// emitted pseudo-label class keeps exactly two members. Sides are NFC'd and
// trimmed in place.
inline std::vector<TranslationPair> sanitize_pairs(
    const std::vector<TranslationPair>& pairs, std::uint64_t* dropped = nullptr) {
  std::vector<TranslationPair> out;
  out.reserve(pairs.size());
  std::uint64_t drops = 0;
  const auto clean = [](const std::string& s, std::string& result) {
    if (!utf8_valid(s)) return false;
    result = nfc(trim(s));
    if (result.empty()) return false;
    for (char c : result)
      if (c == '\t' || c == '\n' || c == '\r') return false;
    return true;
  };
  for (const auto& p : pairs) {
    TranslationPair q = p;
    if (clean(p.src_name, q.src_name) && clean(p.tgt_name, q.tgt_name))
      out.push_back(std::move(q));
    else
      ++drops;
  }
  if (dropped) *dropped = drops;
  return out;
}

// Each pair becomes its own two-member class: record i of the source name
// and record i of the target name share pseudo_label(src, tgt, i).
// Duplicated input pairs are kept and get distinct classes.
inline std::vector<NameRecord> pairs_to_records(
    const std::vector<TranslationPair>& pairs, char marker = '\0') {
  std::vector<NameRecord> records;
  records.reserve(pairs.size() * 2);
  std::uint64_t index = 0;
  for (const auto& p : pairs) {
    ++index;
    const LabelId label = pseudo_label(p.src_lang, p.tgt_lang, index, marker);
    records.push_back({p.src_name, label, p.src_lang});
    records.push_back({p.tgt_name, label, p.tgt_lang});
  }
  return records;
}

}  // namespace xsap
