#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "test_support.hpp"
#include "xsap/linker.hpp"

using namespace xsap;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.vocab_size = 2048;
  cfg.embed_dim = 16;
  cfg.ngram_order = 2;
  cfg.seed = 7;
  return cfg;
}

CandidateIndex index_from_embeddings(const Matrix& e) {
  CandidateIndex index;
  for (std::size_t i = 0; i < e.rows; ++i) {
    index.names.push_back("cand" + std::to_string(i));
    index.cuis.push_back(LabelId{"C" + std::to_string(i)});
  }
  index.embeddings = e;
  return index;
}

RankedResult result_with_cuis(const std::vector<std::string>& cuis) {
  RankedResult r;
  for (const auto& c : cuis) r.predicted_cuis.push_back(LabelId{c});
  return r;
}

TEST(BuildIndex, EmptyOntologyIsError) {
  const auto params = init_params(small_config());
  EXPECT_THROW(build_index(params, {}), std::runtime_error);
}

TEST(BuildIndex, SingleRecordAndInputOrder) {
  const auto params = init_params(small_config());
  const auto index = build_index(
      params, {{"aspirin", LabelId{"C1"}, "en"}, {"heart", LabelId{"C2"}, "en"}});
  ASSERT_EQ(index.size(), 2u);
  EXPECT_EQ(index.names[0], "aspirin");
  EXPECT_EQ(index.cuis[1].value, "C2");
}

TEST(BuildIndex, DuplicateNamesWithDifferentCuisRetained) {
  const auto params = init_params(small_config());
  const auto index = build_index(
      params, {{"cold", LabelId{"C1"}, "en"}, {"cold", LabelId{"C2"}, "en"}});
  EXPECT_EQ(index.size(), 2u);
}

TEST(Rank, ExactStringMatchRanksFirstWithUnitSimilarity) {
  const auto params = init_params(small_config());
  const std::vector<NameRecord> onto = {
      {"aspirin", LabelId{"C1"}, "en"},
      {"paracetamol", LabelId{"C2"}, "en"},
      {"ibuprofen", LabelId{"C3"}, "en"},
  };
  const auto index = build_index(params, onto);
  const auto result = rank(index, "paracetamol", params, 2);
  ASSERT_EQ(result.entries.size(), 2u);
  EXPECT_EQ(result.entries[0].name, "paracetamol");
  EXPECT_NEAR(result.entries[0].similarity, 1.0, 1e-9);
}

TEST(Rank, TieBrokenByLowerIndex) {
  const auto params = init_params(small_config());
  // identical name twice: identical embeddings, distinct CUIs
  const auto index = build_index(
      params, {{"same", LabelId{"C9"}, "en"}, {"same", LabelId{"C3"}, "en"}});
  const auto result = rank(index, "same", params, 2);
  EXPECT_EQ(result.entries[0].cui.value, "C9");  // index 0 wins the tie
  EXPECT_EQ(result.entries[1].cui.value, "C3");
}

TEST(Rank, FiveCandidateHandFixture) {
  // 2D embeddings; query (1, 0); dots: 1.0, 0.8, 0.0, -1.0, 0.6
  Matrix e(5, 2);
  e.at(0, 0) = 1.0;
  e.at(1, 0) = 0.8;
  e.at(1, 1) = 0.6;
  e.at(2, 1) = 1.0;
  e.at(3, 0) = -1.0;
  e.at(4, 0) = 0.6;
  e.at(4, 1) = 0.8;
  const auto index = index_from_embeddings(e);
  const std::vector<double> query = {1.0, 0.0};
  const auto result = rank_by_embedding(index, query, 5);
  const std::vector<std::string> want = {"cand0", "cand1", "cand4", "cand2",
                                         "cand3"};
  ASSERT_EQ(result.entries.size(), 5u);
  for (std::size_t i = 0; i < want.size(); ++i)
    EXPECT_EQ(result.entries[i].name, want[i]);
  EXPECT_DOUBLE_EQ(result.entries[0].similarity, 1.0);
  EXPECT_DOUBLE_EQ(result.entries[2].similarity, 0.6);
}

TEST(Rank, PredictedCuisDedupInRankOrder) {
  // sims descending by index: cuis A A B A C -> predicted A B C
  Matrix e(5, 1);
  for (std::size_t i = 0; i < 5; ++i) e.at(i, 0) = 1.0 - 0.1 * static_cast<double>(i);
  auto index = index_from_embeddings(e);
  index.cuis = {LabelId{"A"}, LabelId{"A"}, LabelId{"B"}, LabelId{"A"},
                LabelId{"C"}};
  const std::vector<double> query = {1.0};
  const auto result = rank_by_embedding(index, query, 3);
  ASSERT_EQ(result.predicted_cuis.size(), 3u);
  EXPECT_EQ(result.predicted_cuis[0].value, "A");
  EXPECT_EQ(result.predicted_cuis[1].value, "B");
  EXPECT_EQ(result.predicted_cuis[2].value, "C");
}

TEST(Rank, KLargerThanIndexClamped) {
  Matrix e(3, 2);
  for (std::size_t i = 0; i < 3; ++i) e.at(i, 0) = 1.0;
  const auto index = index_from_embeddings(e);
  const std::vector<double> query = {1.0, 0.0};
  const auto result = rank_by_embedding(index, query, 10);
  EXPECT_EQ(result.entries.size(), 3u);
}

TEST(Rank, Top1EqualsBruteForceMaximum) {
  Rng rng(41);
  const Matrix e = testsup::random_unit_rows(rng, 1000, 8);
  const auto index = index_from_embeddings(e);
  for (int q = 0; q < 20; ++q) {
    const Matrix qe = testsup::random_unit_rows(rng, 1, 8);
    std::vector<double> query(qe.row(0).begin(), qe.row(0).end());
    const auto result = rank_by_embedding(index, query, 5);
    double best = -2.0;
    for (std::size_t i = 0; i < e.rows; ++i)
      best = std::max(best, dot(e.row(i), query));
    EXPECT_DOUBLE_EQ(result.entries[0].similarity, best);
  }
}

TEST(Rank, FullOrderMatchesBruteForceSort) {
  Rng rng(42);
  const Matrix e = testsup::random_unit_rows(rng, 200, 6);
  const auto index = index_from_embeddings(e);
  const Matrix qe = testsup::random_unit_rows(rng, 1, 6);
  std::vector<double> query(qe.row(0).begin(), qe.row(0).end());
  const auto result = rank_by_embedding(index, query, 200);

  std::vector<std::pair<double, std::size_t>> brute;
  for (std::size_t i = 0; i < e.rows; ++i) brute.push_back({dot(e.row(i), query), i});
  std::stable_sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (std::size_t r = 0; r < brute.size(); ++r)
    EXPECT_EQ(result.entries[r].name, "cand" + std::to_string(brute[r].second));
}

TEST(PrecisionAtK, HandEnumeratedDedupRanks) {
  // golds at dedup ranks 1, 3, 7: P@1 = 1/3, P@5 = 2/3
  const std::vector<RankedResult> results = {
      result_with_cuis({"G1", "X1", "X2", "X3", "X4", "X5", "X6"}),
      result_with_cuis({"X1", "X2", "G2", "X3", "X4", "X5", "X6"}),
      result_with_cuis({"X1", "X2", "X3", "X4", "X5", "X6", "G3"}),
  };
  const std::vector<LabelId> golds = {LabelId{"G1"}, LabelId{"G2"},
                                      LabelId{"G3"}};
  EXPECT_DOUBLE_EQ(precision_at_k(results, golds, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(precision_at_k(results, golds, 5), 2.0 / 3.0);
}

TEST(PrecisionAtK, AllAtRankOneAndAllAbsent) {
  const std::vector<RankedResult> results = {result_with_cuis({"G", "X"}),
                                             result_with_cuis({"G", "Y"})};
  const std::vector<LabelId> gold = {LabelId{"G"}, LabelId{"G"}};
  EXPECT_DOUBLE_EQ(precision_at_k(results, gold, 1), 1.0);
  const std::vector<LabelId> absent = {LabelId{"Z"}, LabelId{"Z"}};
  EXPECT_DOUBLE_EQ(precision_at_k(results, absent, 5), 0.0);
}

TEST(PrecisionAtK, LengthMismatchIsError) {
  EXPECT_THROW(precision_at_k({result_with_cuis({"A"})}, {}, 1),
               std::runtime_error);
}

TEST(PrecisionAtK, P1NeverExceedsP5) {
  Rng rng(43);
  const Matrix e = testsup::random_unit_rows(rng, 300, 8);
  auto index = index_from_embeddings(e);
  for (std::size_t i = 0; i < index.cuis.size(); ++i)
    index.cuis[i] = LabelId{"C" + std::to_string(rng.bounded(60))};
  std::vector<RankedResult> results;
  std::vector<LabelId> golds;
  for (int q = 0; q < 50; ++q) {
    const Matrix qe = testsup::random_unit_rows(rng, 1, 8);
    std::vector<double> query(qe.row(0).begin(), qe.row(0).end());
    results.push_back(rank_by_embedding(index, query, 5));
    golds.push_back(LabelId{"C" + std::to_string(rng.bounded(60))});
  }
  EXPECT_LE(precision_at_k(results, golds, 1),
            precision_at_k(results, golds, 5));
}

TEST(PrecisionAtK, InvariantUnderIndexPermutationWithDistinctSims) {
  Rng rng(44);
  const Matrix e = testsup::random_unit_rows(rng, 64, 8);
  auto index = index_from_embeddings(e);

  // reversed copy
  Matrix re(64, 8);
  CandidateIndex rindex;
  for (std::size_t i = 0; i < 64; ++i) {
    const std::size_t j = 63 - i;
    for (std::size_t c = 0; c < 8; ++c) re.at(i, c) = e.at(j, c);
    rindex.names.push_back(index.names[j]);
    rindex.cuis.push_back(index.cuis[j]);
  }
  rindex.embeddings = re;

  for (int q = 0; q < 10; ++q) {
    const Matrix qe = testsup::random_unit_rows(rng, 1, 8);
    std::vector<double> query(qe.row(0).begin(), qe.row(0).end());
    const auto a = rank_by_embedding(index, query, 5);
    const auto b = rank_by_embedding(rindex, query, 5);
    ASSERT_EQ(a.predicted_cuis.size(), b.predicted_cuis.size());
    for (std::size_t r = 0; r < a.predicted_cuis.size(); ++r)
      EXPECT_EQ(a.predicted_cuis[r], b.predicted_cuis[r]);
  }
}

TEST(Evaluate, SingleQueryAtRankOne) {
  const auto params = init_params(small_config());
  const auto index = build_index(params, {{"aspirin", LabelId{"C1"}, "en"},
                                          {"heart", LabelId{"C2"}, "en"}});
  std::map<std::string, std::vector<EvalExample>> tests;
  tests["en"] = {{"", "aspirin", LabelId{"C1"}, "en"}};
  const auto report = evaluate(params, index, tests);
  EXPECT_DOUBLE_EQ(report.per_lang.at("en").p1, 1.0);
  EXPECT_DOUBLE_EQ(report.avg.p1, 1.0);
}

TEST(Evaluate, MacroAverageIsUnweighted) {
  const auto params = init_params(small_config());
  const auto index = build_index(params, {{"aspirin", LabelId{"C1"}, "en"},
                                          {"zzzz", LabelId{"C2"}, "en"}});
  std::map<std::string, std::vector<EvalExample>> tests;
  tests["en"] = {{"", "aspirin", LabelId{"C1"}, "en"}};          // hit
  tests["de"] = {{"", "aspirin", LabelId{"C9"}, "de"},           // miss
                 {"", "aspirin", LabelId{"C8"}, "de"},           // miss
                 {"", "aspirin", LabelId{"C7"}, "de"}};          // miss
  const auto report = evaluate(params, index, tests);
  EXPECT_DOUBLE_EQ(report.per_lang.at("en").p1, 1.0);
  EXPECT_DOUBLE_EQ(report.per_lang.at("de").p1, 0.0);
  EXPECT_DOUBLE_EQ(report.avg.p1, 0.5);  // not 0.25
  EXPECT_EQ(report.avg.n, 4u);
}

TEST(Evaluate, EmptyLanguageReportedButExcludedFromAverage) {
  const auto params = init_params(small_config());
  const auto index = build_index(params, {{"aspirin", LabelId{"C1"}, "en"}});
  std::map<std::string, std::vector<EvalExample>> tests;
  tests["en"] = {{"", "aspirin", LabelId{"C1"}, "en"}};
  tests["th"] = {};
  const auto report = evaluate(params, index, tests);
  EXPECT_EQ(report.per_lang.at("th").n, 0u);
  EXPECT_DOUBLE_EQ(report.avg.p1, 1.0);
}

TEST(Evaluate, CustomEntryDepth) {
  const auto params = init_params(small_config());
  std::vector<NameRecord> onto;
  for (int i = 0; i < 10; ++i)
    onto.push_back({"name" + std::to_string(i),
                    LabelId{"C" + std::to_string(i)}, "en"});
  const auto index = build_index(params, onto);
  const auto result = rank(index, "name3", params, 7);
  EXPECT_EQ(result.entries.size(), 7u);
  EXPECT_EQ(result.predicted_cuis.size(), 7u);
}

TEST(Metrics, StableFormat) {
  EvalReport report;
  report.per_lang["de"] = {0.75, 0.9, 4};
  report.per_lang["es"] = {0.5, 0.5, 2};
  report.avg = {0.625, 0.7, 6};
  EXPECT_EQ(format_metrics(report),
            "lang\tp_at_1\tp_at_5\tn\n"
            "de\t0.750000\t0.900000\t4\n"
            "es\t0.500000\t0.500000\t2\n"
            "avg\t0.625000\t0.700000\t6\n");
}

TEST(TestSet, ReadFormatRoundTrip) {
  const std::vector<EvalExample> examples = {
      {"Die Inkubationszeit von COVID-19.", "Inkubationszeit", LabelId{"C0042196"},
       "de"},
      {"", "Grippe", LabelId{"C1"}, "de"},
  };
  std::istringstream in(format_test_set(examples));
  EXPECT_EQ(read_test_set(in, "de"), examples);
}

TEST(TestSet, RejectsMalformedLines) {
  std::istringstream missing("sentence only\n");
  EXPECT_THROW(read_test_set(missing, "de"), std::runtime_error);
  std::istringstream empty_mention("s\t\tC1\n");
  EXPECT_THROW(read_test_set(empty_mention, "de"), std::runtime_error);
}

}  // namespace
