#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xsap/io.hpp"
#include "xsap/text.hpp"

namespace xsap {

// Categorical label of a name: a UMLS CUI ("C0042196") or a synthetic
// translation pseudo-label ("ENDE2344").
struct LabelId {
  std::string value;

  bool operator==(const LabelId&) const = default;
  auto operator<=>(const LabelId&) const = default;

  // non-empty, no tab / newline / CR / pipe (the record and RRF formats use
  // those as structure)
  static bool valid(std::string_view v) {
    if (v.empty()) return false;
    for (char c : v)
      if (c == '\t' || c == '\n' || c == '\r' || c == '|') return false;
    return true;
  }

  // ^C[0-9]+$
  static bool is_cui(std::string_view v) {
    if (v.size() < 2 || v[0] != 'C') return false;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] < '0' || v[i] > '9') return false;
    return true;
  }
};

inline bool valid_lang_code(std::string_view lang) {
  return lang.size() == 2 && lang[0] >= 'a' && lang[0] <= 'z' &&
         lang[1] >= 'a' && lang[1] <= 'z';
}

// One (name, label, language) item, the unit every pipeline stage consumes.
struct NameRecord {
  std::string name;
  LabelId label;
  std::string lang;  // two lowercase letters, "xx" when unknown

  bool operator==(const NameRecord&) const = default;
};

// All learning hyperparameters. Defaults are the reference operating point;
// any subset can be overridden from a config file.
struct TrainConfig {
  double margin_lambda = 0.2;   // mining margin
  double alpha = 2.0;           // negative-pair temperature
  double beta = 50.0;           // positive-pair temperature
  double epsilon = 1.0;         // similarity offset
  std::uint32_t batch_size = 512;
  std::uint32_t names_per_class = 2;
  double learning_rate = 2e-5;
  std::uint32_t epochs = 1;
  std::uint32_t max_name_chars = 25;  // truncation limit, in scalar values
  std::uint32_t embed_dim = 64;
  std::uint32_t ngram_order = 3;
  std::uint32_t vocab_size = 65536;   // hashed n-gram table rows
  std::uint64_t seed = 42;

  void validate() const {
    if (margin_lambda < 0) throw std::runtime_error("config: margin_lambda must be >= 0");
    if (alpha <= 0) throw std::runtime_error("config: alpha must be > 0");
    if (beta <= 0) throw std::runtime_error("config: beta must be > 0");
    if (batch_size == 0) throw std::runtime_error("config: batch_size must be positive");
    if (names_per_class < 2) throw std::runtime_error("config: names_per_class must be >= 2");
    if (batch_size % names_per_class != 0)
      throw std::runtime_error("config: batch_size must be a multiple of names_per_class");
    if (learning_rate <= 0) throw std::runtime_error("config: learning_rate must be > 0");
    if (max_name_chars == 0) throw std::runtime_error("config: max_name_chars must be positive");
    if (embed_dim == 0) throw std::runtime_error("config: embed_dim must be positive");
    if (ngram_order == 0) throw std::runtime_error("config: ngram_order must be >= 1");
    if (vocab_size == 0) throw std::runtime_error("config: vocab_size must be positive");
  }
};

namespace detail {

inline double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(std::string(v), &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: unparsable value for key '" +
                             std::string(key) + "': '" + std::string(v) + "'");
  }
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  try {
    std::size_t pos = 0;
    const unsigned long long u = std::stoull(std::string(v), &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return u;
  } catch (const std::exception&) {
    throw std::runtime_error("config: unparsable value for key '" +
                             std::string(key) + "': '" + std::string(v) + "'");
  }
}

template <typename T>
T parse_u32(std::string_view key, std::string_view v) {
  const auto u = parse_uint(key, v);
  if (u > std::numeric_limits<T>::max())
    throw std::runtime_error("config: value out of range for key '" +
                             std::string(key) + "'");
  return static_cast<T>(u);
}

inline std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

}  // namespace detail

// `key = value` lines, '#' starts a comment, keys are the TrainConfig field
// names. Unknown keys and unparsable values are errors naming the offender;
// absent keys keep their defaults.
inline TrainConfig parse_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (get_line(in, line)) {
    ++lineno;
    std::string_view sv(line);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos)
      sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw std::runtime_error("config: line " + std::to_string(lineno) +
                               " is not 'key = value'");
    const auto key = trim(sv.substr(0, eq));
    const auto val = trim(sv.substr(eq + 1));
    if (key == "margin_lambda") cfg.margin_lambda = detail::parse_double(key, val);
    else if (key == "alpha") cfg.alpha = detail::parse_double(key, val);
    else if (key == "beta") cfg.beta = detail::parse_double(key, val);
    else if (key == "epsilon") cfg.epsilon = detail::parse_double(key, val);
    else if (key == "batch_size") cfg.batch_size = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "names_per_class") cfg.names_per_class = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "learning_rate") cfg.learning_rate = detail::parse_double(key, val);
    else if (key == "epochs") cfg.epochs = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "max_name_chars") cfg.max_name_chars = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "embed_dim") cfg.embed_dim = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "ngram_order") cfg.ngram_order = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "vocab_size") cfg.vocab_size = detail::parse_u32<std::uint32_t>(key, val);
    else if (key == "seed") cfg.seed = detail::parse_uint(key, val);
    else
      throw std::runtime_error("config: unknown key '" + std::string(key) + "'");
  }
  cfg.validate();
  return cfg;
}

inline TrainConfig load_config(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_config(in);
}

inline std::string format_config(const TrainConfig& c) {
  std::ostringstream out;
  out << "margin_lambda = " << detail::fmt_double(c.margin_lambda) << '\n'
      << "alpha = " << detail::fmt_double(c.alpha) << '\n'
      << "beta = " << detail::fmt_double(c.beta) << '\n'
      << "epsilon = " << detail::fmt_double(c.epsilon) << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "names_per_class = " << c.names_per_class << '\n'
      << "learning_rate = " << detail::fmt_double(c.learning_rate) << '\n'
      << "epochs = " << c.epochs << '\n'
      << "max_name_chars = " << c.max_name_chars << '\n'
      << "embed_dim = " << c.embed_dim << '\n'
      << "ngram_order = " << c.ngram_order << '\n'
      << "vocab_size = " << c.vocab_size << '\n'
      << "seed = " << c.seed << '\n';
  return out.str();
}

inline void save_config(const TrainConfig& cfg, const std::filesystem::path& path) {
  atomic_write(path, format_config(cfg));
}

struct CleanResult {
  std::vector<NameRecord> records;
  std::uint64_t dropped = 0;
};

// NFC-normalizes and trims names, truncates them to max_name_chars scalar
// values, and drops records that violate the NameRecord invariants. Names
// holding tab/newline/CR are dropped as well: the canonical record format
// is TSV. Input order is preserved; the pass is idempotent.
inline CleanResult validate_records(const std::vector<NameRecord>& records,
                                    std::uint32_t max_name_chars) {
  CleanResult out;
  out.records.reserve(records.size());
  for (const auto& r : records) {
    if (!utf8_valid(r.name) || !LabelId::valid(r.label.value) ||
        !valid_lang_code(r.lang)) {
      ++out.dropped;
      continue;
    }
    std::string name = nfc(trim(r.name));
    bool control = false;
    for (char c : name)
      if (c == '\t' || c == '\n' || c == '\r') control = true;
    if (control || name.empty()) {
      ++out.dropped;
      continue;
    }
    name = std::string(truncate_codepoints(name, max_name_chars));
    out.records.push_back({std::move(name), r.label, r.lang});
  }
  return out;
}

// Canonical record format: `label<TAB>name<TAB>lang`, one record per line.
inline void write_records(std::ostream& out, const std::vector<NameRecord>& records) {
  for (const auto& r : records)
    out << r.label.value << '\t' << r.name << '\t' << r.lang << '\n';
}

inline std::string format_records(const std::vector<NameRecord>& records) {
  std::ostringstream out;
  write_records(out, records);
  return out.str();
}

inline std::vector<NameRecord> read_records(std::istream& in) {
  std::vector<NameRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (get_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3)
      throw std::runtime_error("records: line " + std::to_string(lineno) +
                               ": expected 3 tab-separated fields, got " +
                               std::to_string(parts.size()));
    records.push_back({std::string(parts[1]), LabelId{std::string(parts[0])},
                       std::string(parts[2])});
  }
  return records;
}

inline std::vector<NameRecord> load_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_records(in);
}

}  // namespace xsap
