#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "xsap/bitext.hpp"

using namespace xsap;

namespace {

TEST(WordTranslations, EmptyStream) {
  std::istringstream in("");
  EXPECT_TRUE(parse_word_translations(in, "en", "es").empty());
}

TEST(WordTranslations, SingleWellFormedLine) {
  std::istringstream in("dog perro\n");
  const auto pairs = parse_word_translations(in, "en", "es");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (TranslationPair{"dog", "perro", "en", "es"}));
}

TEST(WordTranslations, TabSeparatorAndSkips) {
  std::istringstream in("dog\tperro\n\nnoseparator\ncat gato\n");
  BitextStats stats;
  const auto pairs = parse_word_translations(in, "en", "es", &stats);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].src_name, "cat");
  EXPECT_EQ(stats.skipped, 2u);
}

TEST(TitlePairs, PhraseSurvivesOnTab) {
  std::istringstream in("Incubation period\tInkubationszeit\n");
  const auto pairs = parse_title_pairs(in, "en", "de");
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].src_name, "Incubation period");
  EXPECT_EQ(pairs[0].tgt_name, "Inkubationszeit");
}

TEST(TitlePairs, LineWithoutTabSkippedAndCounted) {
  std::istringstream in("no tab here\nA\tB\n");
  BitextStats stats;
  const auto pairs = parse_title_pairs(in, "en", "de", &stats);
  EXPECT_EQ(pairs.size(), 1u);
  EXPECT_EQ(stats.skipped, 1u);
}

TEST(PseudoLabel, FootnoteCoding) {
  EXPECT_EQ(pseudo_label("en", "de", 2344).value, "ENDE2344");
  EXPECT_EQ(pseudo_label("en", "th", 1).value, "ENTH1");
  EXPECT_EQ(pseudo_label("es", "en", 7).value, "ESEN7");
}

TEST(PseudoLabel, MarkerVariantForCombinedStreams) {
  EXPECT_EQ(pseudo_label("en", "de", 17, 'M').value, "ENDEM17");
}

TEST(PseudoLabel, NeverCollidesWithCuiPattern) {
  for (std::uint64_t i = 1; i < 2000; i += 37) {
    EXPECT_FALSE(LabelId::is_cui(pseudo_label("cs", "ja", i).value));
    EXPECT_FALSE(LabelId::is_cui(pseudo_label("en", "de", i, 'M').value));
  }
}

TEST(PairsToRecords, OnePairGivesTwoRecordsOneLabel) {
  const auto records =
      pairs_to_records({{"dog", "perro", "en", "es"}});
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].label, records[1].label);
  EXPECT_EQ(records[0].name, "dog");
  EXPECT_EQ(records[0].lang, "en");
  EXPECT_EQ(records[1].name, "perro");
  EXPECT_EQ(records[1].lang, "es");
}

TEST(PairsToRecords, EmptyInput) {
  EXPECT_TRUE(pairs_to_records({}).empty());
}

TEST(PairsToRecords, EveryClassHasExactlyTwoMembers) {
  std::vector<TranslationPair> pairs;
  for (int i = 0; i < 53; ++i)
    pairs.push_back({"w" + std::to_string(i), "v" + std::to_string(i), "en", "fi"});
  pairs.push_back(pairs.front());  // duplicate pair keeps its own class
  const auto records = pairs_to_records(pairs);
  EXPECT_EQ(records.size(), 2 * pairs.size());
  std::map<std::string, int> class_size;
  for (const auto& r : records) ++class_size[r.label.value];
  EXPECT_EQ(class_size.size(), pairs.size());
  for (const auto& [label, size] : class_size) EXPECT_EQ(size, 2);
}

TEST(PairsToRecords, CounterIsOneBasedPerStream) {
  const auto records = pairs_to_records(
      {{"a", "b", "en", "de"}, {"c", "d", "en", "de"}, {"e", "f", "en", "de"}});
  EXPECT_EQ(records[0].label.value, "ENDE1");
  EXPECT_EQ(records[4].label.value, "ENDE3");
}

TEST(SanitizePairs, DropsWholePairWhenOneSideIsInvalid) {
  std::uint64_t dropped = 0;
  const auto pairs = sanitize_pairs(
      {{"ok", "fine", "en", "de"},
       {"bad\tname", "fine", "en", "de"},
       {"ok", "  ", "en", "de"}},
      &dropped);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(dropped, 2u);
}

}  // namespace
