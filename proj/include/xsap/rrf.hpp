#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "xsap/core.hpp"
#include "xsap/hash.hpp"
#include "xsap/io.hpp"

namespace xsap {

// One usable row of a pipe-delimited MRCONSO.RRF line: concept id, RRF
// language code, surface string.
struct RrfRow {
  LabelId cui;
  std::string lat;        // e.g. "ENG"; kept verbatim, mapped at extraction
  std::string str_field;  // the entity name
};

struct RrfParseResult {
  std::optional<RrfRow> row;
  std::string error;
  bool ok() const { return row.has_value(); }
};

// Standard MRCONSO column layout: CUI = field 0, LAT = field 1, STR = field
// 14; full rows have 18 columns. Never throws: arbitrary byte garbage comes
// back as an error value.
inline RrfParseResult parse_rrf_line(std::string_view line) {
  const auto fields = split(line, '|');
  if (fields.size() < 15)
    return {std::nullopt, "too few fields (" + std::to_string(fields.size()) +
                              " < 15)"};
  const auto cui = fields[0];
  const auto lat = fields[1];
  const auto str = fields[14];
  if (cui.empty()) return {std::nullopt, "empty CUI"};
  if (str.empty()) return {std::nullopt, "empty STR"};
  if (!LabelId::is_cui(cui))
    return {std::nullopt, "malformed CUI '" + std::string(cui) + "'"};
  return {RrfRow{LabelId{std::string(cui)}, std::string(lat), std::string(str)},
          ""};
}

// RRF language codes seen in MRCONSO, mapped to ISO-639-1. Unknown codes
// become "xx".
inline std::string rrf_lang_to_iso(std::string_view lat) {
  static const std::map<std::string_view, std::string_view> kTable = {
      {"ENG", "en"}, {"SPA", "es"}, {"JPN", "ja"}, {"RUS", "ru"},
      {"GER", "de"}, {"KOR", "ko"}, {"CHI", "zh"}, {"TUR", "tr"},
      {"FIN", "fi"}, {"FRE", "fr"}, {"POR", "pt"}, {"DUT", "nl"},
      {"ITA", "it"}, {"CZE", "cs"}, {"NOR", "no"}, {"POL", "pl"},
      {"EST", "et"}, {"SWE", "sv"}, {"HRV", "hr"}, {"GRE", "el"},
      {"LAV", "lv"}};
  const auto it = kTable.find(lat);
  return it == kTable.end() ? "xx" : std::string(it->second);
}

struct ExtractStats {
  std::uint64_t lines = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t unknown_lat = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t filtered_out = 0;
};

// Streams RRF lines into NameRecords: maps LAT to ISO codes, drops exact
// (cui, name, lang) duplicates, applies the optional language filter.
// Output order is input line order. Memory is bounded by the 128-bit dedup
// hash set, not the text.
inline std::vector<NameRecord> extract_synonyms(
    std::istream& in,
    const std::optional<std::set<std::string>>& lang_filter = std::nullopt,
    ExtractStats* stats_out = nullptr) {
  std::vector<NameRecord> records;
  std::unordered_set<Hash128, Hash128Hasher> seen;
  ExtractStats stats;
  std::string line;
  while (get_line(in, line)) {
    ++stats.lines;
    auto parsed = parse_rrf_line(line);
    if (!parsed.ok()) {
      ++stats.parse_errors;
      continue;
    }
    auto& row = *parsed.row;
    std::string lang = rrf_lang_to_iso(row.lat);
    if (lang == "xx") ++stats.unknown_lat;
    if (lang_filter && !lang_filter->count(lang)) {
      ++stats.filtered_out;
      continue;
    }
    std::string key;
    key.reserve(row.cui.value.size() + row.str_field.size() + lang.size() + 2);
    key.append(row.cui.value).push_back('\x1f');
    key.append(row.str_field).push_back('\x1f');
    key.append(lang);
    if (!seen.insert(fnv1a128(key)).second) {
      ++stats.duplicates;
      continue;
    }
    records.push_back({std::move(row.str_field), std::move(row.cui), std::move(lang)});
  }
  if (in.bad()) throw std::runtime_error("rrf: stream read error");
  if (stats_out) *stats_out = stats;
  return records;
}

struct LanguageStats {
  struct Entry {
    std::uint64_t name_count = 0;
    double fraction = 0.0;
  };
  std::map<std::string, Entry> per_lang;  // sorted by language code
  std::uint64_t total = 0;
};

inline LanguageStats language_stats(const std::vector<NameRecord>& records) {
  LanguageStats stats;
  for (const auto& r : records) ++stats.per_lang[r.lang].name_count;
  stats.total = records.size();
  if (stats.total > 0)
    for (auto& [lang, e] : stats.per_lang)
      e.fraction = static_cast<double>(e.name_count) /
                   static_cast<double>(stats.total);
  return stats;
}

inline std::string format_language_stats(const LanguageStats& stats) {
  std::ostringstream out;
  out << "lang\tcount\tfraction\n";
  char buf[32];
  for (const auto& [lang, e] : stats.per_lang) {
    std::snprintf(buf, sizeof(buf), "%.6f", e.fraction);
    out << lang << '\t' << e.name_count << '\t' << buf << '\n';
  }
  out << "total\t" << stats.total << (stats.total ? "\t1.000000\n" : "\t0.000000\n");
  return out.str();
}

}  // namespace xsap
