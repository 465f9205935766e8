// xsap command-line driver: ingestion, training, evaluation, benchmark
// construction, and the transfer-comparison experiment.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xsap/xsap.hpp"

namespace fs = std::filesystem;

namespace {

std::set<std::string> parse_lang_set(const std::string& csv) {
  std::set<std::string> langs;
  for (const auto part : xsap::split(csv, ',')) {
    const auto lang = xsap::trim(part);
    if (!xsap::valid_lang_code(lang))
      throw std::runtime_error("invalid language code '" + std::string(lang) +
                               "' (want two lowercase letters)");
    langs.insert(std::string(lang));
  }
  if (langs.empty()) throw std::runtime_error("empty language list");
  return langs;
}

std::pair<std::string, std::string> parse_lang_pair(const std::string& csv) {
  const auto parts = xsap::split(csv, ',');
  if (parts.size() != 2)
    throw std::runtime_error("--langs wants exactly 'src,tgt' for bitext");
  const auto src = xsap::trim(parts[0]), tgt = xsap::trim(parts[1]);
  if (!xsap::valid_lang_code(src) || !xsap::valid_lang_code(tgt))
    throw std::runtime_error("invalid language code in --langs '" + csv + "'");
  return {std::string(src), std::string(tgt)};
}

xsap::TrainConfig load_config_or_default(const std::string& path,
                                         const std::optional<std::uint64_t>& seed) {
  xsap::TrainConfig cfg;
  if (!path.empty()) cfg = xsap::load_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

// no truncation at ingest time; training and inference truncate via the
// encoder so the limit stays a model property
constexpr std::uint32_t kNoTruncation = 0xffffffffu;

std::vector<xsap::NameRecord> load_validated(const fs::path& path,
                                             std::uint32_t max_name_chars,
                                             const char* what) {
  auto records = xsap::load_records(path);
  auto cleaned = xsap::validate_records(records, max_name_chars);
  if (cleaned.dropped > 0)
    std::cerr << what << ": dropped " << cleaned.dropped << " of "
              << records.size() << " records\n";
  return std::move(cleaned.records);
}

std::map<std::string, std::vector<xsap::EvalExample>> load_test_dir(
    const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("test directory not found: " + dir.string());
  std::map<std::string, std::vector<xsap::EvalExample>> tests;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".tsv") continue;
    const std::string lang = entry.path().stem().string();
    if (!xsap::valid_lang_code(lang)) {
      std::cerr << "skipping " << entry.path() << ": stem is not a language code\n";
      continue;
    }
    auto in = xsap::open_input(entry.path());
    auto examples = xsap::read_test_set(in, lang);
    for (auto& ex : examples) ex.mention = xsap::nfc(xsap::trim(ex.mention));
    tests.emplace(lang, std::move(examples));
  }
  if (tests.empty())
    throw std::runtime_error("no <lang>.tsv test sets in " + dir.string());
  return tests;
}

int cmd_ingest_umls(const std::string& in, const std::string& langs,
                    const std::string& out) {
  std::optional<std::set<std::string>> filter;
  if (!langs.empty()) filter = parse_lang_set(langs);
  auto stream = xsap::open_input(in);
  xsap::ExtractStats stats;
  auto records = xsap::extract_synonyms(stream, filter, &stats);
  const auto cleaned = xsap::validate_records(records, kNoTruncation);
  xsap::atomic_write(out, xsap::format_records(cleaned.records));
  std::cerr << "lines " << stats.lines << ", parse errors " << stats.parse_errors
            << ", unknown languages " << stats.unknown_lat << ", duplicates "
            << stats.duplicates << ", filtered " << stats.filtered_out
            << ", invalid " << cleaned.dropped << "\n";
  std::cerr << xsap::format_language_stats(
      xsap::language_stats(cleaned.records));
  return 0;
}

int cmd_ingest_bitext(const std::string& muse, const std::string& wt,
                      const std::string& langs, const std::string& out) {
  const auto [src, tgt] = parse_lang_pair(langs);
  if (muse.empty() && wt.empty())
    throw std::runtime_error("ingest-bitext: need --muse and/or --wt");
  std::vector<xsap::NameRecord> records;
  const bool combined = !muse.empty() && !wt.empty();
  std::uint64_t dropped = 0;
  if (!wt.empty()) {
    auto stream = xsap::open_input(wt);
    xsap::BitextStats st;
    auto pairs = xsap::parse_title_pairs(stream, src, tgt, &st);
    std::uint64_t d = 0;
    pairs = xsap::sanitize_pairs(pairs, &d);
    dropped += d + st.skipped;
    auto recs = xsap::pairs_to_records(pairs);
    records.insert(records.end(), recs.begin(), recs.end());
  }
  if (!muse.empty()) {
    auto stream = xsap::open_input(muse);
    xsap::BitextStats st;
    auto pairs = xsap::parse_word_translations(stream, src, tgt, &st);
    std::uint64_t d = 0;
    pairs = xsap::sanitize_pairs(pairs, &d);
    dropped += d + st.skipped;
    // 'M' marker keeps dictionary labels from colliding with title labels
    auto recs = xsap::pairs_to_records(pairs, combined ? 'M' : '\0');
    records.insert(records.end(), recs.begin(), recs.end());
  }
  xsap::atomic_write(out, xsap::format_records(records));
  std::cerr << records.size() / 2 << " pairs (" << records.size()
            << " records), " << dropped << " lines/pairs skipped\n";
  return 0;
}

int cmd_train(const std::string& data, const std::string& config_path,
              const std::string& bitext, const std::string& out,
              const std::string& trace, const std::optional<std::uint64_t>& seed) {
  const auto cfg = load_config_or_default(config_path, seed);
  const auto records = load_validated(data, cfg.max_name_chars, "train data");
  xsap::TrainResult result;
  if (bitext.empty()) {
    result = xsap::train(records, cfg);
  } else {
    const auto stage2 = load_validated(bitext, cfg.max_name_chars, "bitext data");
    result = xsap::train_sequential(records, stage2, cfg);
  }
  xsap::save_checkpoint(out, result.params, cfg);
  if (!trace.empty())
    xsap::atomic_write(trace, xsap::format_trace_csv(result.trace));
  double last_loss = 0.0;
  if (!result.trace.empty()) last_loss = result.trace.back().loss;
  std::cerr << "trained " << result.trace.size() << " steps, final loss "
            << last_loss << ", checkpoint " << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& model, const std::string& ontology,
                 const std::string& tests, const std::string& out,
                 std::size_t k) {
  const auto ck = xsap::load_checkpoint(model);
  const auto onto =
      load_validated(ontology, ck.config.max_name_chars, "ontology");
  const auto index = xsap::build_index(ck.params, onto);
  const auto test_sets = load_test_dir(tests);
  const auto report = xsap::evaluate(ck.params, index, test_sets, k);
  const auto text = xsap::format_metrics(report);
  if (out.empty())
    std::cout << text;
  else
    xsap::atomic_write(out, text);
  return 0;
}

int cmd_build_benchmark(const std::string& in, const std::string& map_path,
                        const std::string& out_dir, std::size_t n,
                        std::uint64_t seed) {
  auto occ_in = xsap::open_input(in);
  const auto occurrences = xsap::read_occurrences(occ_in);
  auto map_in = xsap::open_input(map_path);
  const auto map = xsap::read_title_map(map_in);
  xsap::LinkStats link_stats;
  const auto result =
      xsap::build_benchmark(occurrences, map, n, seed, &link_stats);
  fs::create_directories(out_dir);
  for (const auto& [lang, examples] : result.test_sets)
    xsap::atomic_write(fs::path(out_dir) / (lang + ".tsv"),
                       xsap::format_test_set(examples));
  xsap::atomic_write(fs::path(out_dir) / "stats.tsv",
                     xsap::format_stats_tsv(result.stats));
  std::cerr << "unmapped titles " << link_stats.unmapped << "\n"
            << xsap::format_stats_tsv(result.stats);
  return 0;
}

int cmd_stats(const std::string& in, const std::string& out) {
  const auto records = xsap::load_records(in);
  const auto text = xsap::format_language_stats(xsap::language_stats(records));
  if (out.empty())
    std::cout << text;
  else
    xsap::atomic_write(out, text);
  return 0;
}

int cmd_transfer(const std::string& syn_en, const std::string& syn_all,
                 const std::string& bitext, const std::string& ontology,
                 const std::string& tests, const std::string& config_path,
                 const std::string& variants_csv, const std::string& out,
                 const std::optional<std::uint64_t>& seed) {
  const auto cfg = load_config_or_default(config_path, seed);

  std::vector<std::string> variants;
  for (const auto part : xsap::split(variants_csv, ','))
    variants.emplace_back(xsap::trim(part));
  const std::set<std::string> known = {"en_syn", "all_syn", "en_syn+bitext",
                                       "all_syn+bitext"};
  for (const auto& v : variants)
    if (!known.count(v))
      throw std::runtime_error("unknown variant '" + v +
                               "' (want en_syn, all_syn, en_syn+bitext, "
                               "all_syn+bitext)");

  const auto need = [&](const std::string& flag, const std::string& path) {
    if (path.empty())
      throw std::runtime_error("requested variants need " + flag);
    return path;
  };

  std::vector<xsap::NameRecord> en_records, all_records, bt_records;
  for (const auto& v : variants) {
    if (v.rfind("en_syn", 0) == 0 && en_records.empty())
      en_records = load_validated(need("--syn-en", syn_en), cfg.max_name_chars,
                                  "en_syn data");
    if (v.rfind("all_syn", 0) == 0 && all_records.empty())
      all_records = load_validated(need("--syn-all", syn_all),
                                   cfg.max_name_chars, "all_syn data");
    if (v.find("+bitext") != std::string::npos && bt_records.empty())
      bt_records = load_validated(need("--bitext", bitext), cfg.max_name_chars,
                                  "bitext data");
  }

  const auto onto = load_validated(ontology, cfg.max_name_chars, "ontology");
  const auto test_sets = load_test_dir(tests);

  // column order: languages sorted, then the macro average
  std::vector<std::string> langs;
  for (const auto& [lang, examples] : test_sets) langs.push_back(lang);

  std::ostringstream table;
  table << "variant";
  for (const auto& lang : langs) table << '\t' << lang;
  table << "\tavg\n";
  char cell[64];
  for (const auto& v : variants) {
    xsap::TrainResult trained;
    const auto& base = (v.rfind("all_syn", 0) == 0) ? all_records : en_records;
    if (v.find("+bitext") != std::string::npos)
      trained = xsap::train_sequential(base, bt_records, cfg);
    else
      trained = xsap::train(base, cfg);
    const auto index = xsap::build_index(trained.params, onto);
    const auto report = xsap::evaluate(trained.params, index, test_sets);
    table << v;
    for (const auto& lang : langs) {
      const auto& m = report.per_lang.at(lang);
      std::snprintf(cell, sizeof(cell), "%.1f/%.1f", 100.0 * m.p1, 100.0 * m.p5);
      table << '\t' << cell;
    }
    std::snprintf(cell, sizeof(cell), "%.1f/%.1f", 100.0 * report.avg.p1,
                  100.0 * report.avg.p5);
    table << '\t' << cell << '\n';
    std::cerr << "variant " << v << " done\n";
  }
  if (out.empty())
    std::cout << table.str();
  else
    xsap::atomic_write(out, table.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-lingual biomedical entity linking toolkit"};
  app.require_subcommand(1);

  std::string in, out, langs, config, data, bitext, model, ontology, tests,
      map_path, trace, variants = "en_syn,all_syn", syn_en, syn_all, muse_path,
      wt_path;
  std::size_t k = 5, n = 1000;
  std::uint64_t seed_value = 0;
  bool seed_given = false;

  auto* ingest_umls = app.add_subcommand("ingest-umls",
                                         "RRF synonym file -> record TSV");
  ingest_umls->add_option("--in", in, "MRCONSO.RRF path")->required();
  ingest_umls->add_option("--langs", langs, "comma list of language codes to keep");
  ingest_umls->add_option("--out", out, "output records TSV")->required();

  auto* ingest_bitext = app.add_subcommand(
      "ingest-bitext", "translation pairs -> pseudo-labelled record TSV");
  ingest_bitext->add_option("--muse", muse_path, "word-translation file (space/tab separated)");
  ingest_bitext->add_option("--wt", wt_path, "title-pair file (tab separated)");
  ingest_bitext->add_option("--langs", langs, "source,target language codes")->required();
  ingest_bitext->add_option("--out", out, "output records TSV")->required();

  auto* train = app.add_subcommand("train", "self-alignment training");
  train->add_option("--data", data, "records TSV")->required();
  train->add_option("--config", config, "config file (defaults when omitted)");
  train->add_option("--bitext", bitext, "optional stage-2 records TSV");
  train->add_option("--out", out, "checkpoint path")->required();
  train->add_option("--trace", trace, "loss trace CSV path");
  train->add_option("--seed", seed_value, "seed override")
      ->each([&](const std::string&) { seed_given = true; });

  auto* evaluate = app.add_subcommand("evaluate", "Precision@1/@5 against an ontology");
  evaluate->add_option("--model", model, "checkpoint path")->required();
  evaluate->add_option("--ontology", ontology, "candidate records TSV")->required();
  evaluate->add_option("--tests", tests, "directory of <lang>.tsv test sets")->required();
  evaluate->add_option("--out", out, "metrics report path (stdout when omitted)");
  evaluate->add_option("--k", k, "ranked names per query (>= 5)");

  auto* build_benchmark = app.add_subcommand(
      "build-benchmark", "mention occurrences + title map -> test sets");
  build_benchmark->add_option("--in", in, "occurrences TSV")->required();
  build_benchmark->add_option("--map", map_path, "title<TAB>cui TSV")->required();
  build_benchmark->add_option("--out", out, "output directory")->required();
  build_benchmark->add_option("--n", n, "sample size per language (0 = keep all)");
  build_benchmark->add_option("--seed", seed_value, "sampling seed")
      ->each([&](const std::string&) { seed_given = true; });

  auto* stats = app.add_subcommand("stats", "per-language record statistics");
  stats->add_option("--in", in, "records TSV")->required();
  stats->add_option("--out", out, "output path (stdout when omitted)");

  auto* transfer = app.add_subcommand(
      "transfer", "train and compare transfer variants on shared test sets");
  transfer->add_option("--syn-en", syn_en, "English-only synonym records TSV");
  transfer->add_option("--syn-all", syn_all, "all-language synonym records TSV");
  transfer->add_option("--bitext", bitext, "translation records TSV");
  transfer->add_option("--ontology", ontology, "candidate records TSV")->required();
  transfer->add_option("--tests", tests, "directory of <lang>.tsv test sets")->required();
  transfer->add_option("--config", config, "config file");
  transfer->add_option("--variants", variants,
                       "comma list: en_syn,all_syn,en_syn+bitext,all_syn+bitext");
  transfer->add_option("--out", out, "report path (stdout when omitted)");
  transfer->add_option("--seed", seed_value, "seed override")
      ->each([&](const std::string&) { seed_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints message / usage text
    return code == 0 ? 0 : 1;     // --help is success; everything else: usage error
  }

  const std::optional<std::uint64_t> seed =
      seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt;
  try {
    if (ingest_umls->parsed()) return cmd_ingest_umls(in, langs, out);
    if (ingest_bitext->parsed())
      return cmd_ingest_bitext(muse_path, wt_path, langs, out);
    if (train->parsed()) return cmd_train(data, config, bitext, out, trace, seed);
    if (evaluate->parsed()) return cmd_evaluate(model, ontology, tests, out, k);
    if (build_benchmark->parsed())
      return cmd_build_benchmark(in, map_path, out, n, seed_given ? seed_value : 1);
    if (stats->parsed()) return cmd_stats(in, out);
    if (transfer->parsed())
      return cmd_transfer(syn_en, syn_all, bitext, ontology, tests, config,
                          variants, out, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
