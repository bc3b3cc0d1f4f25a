#include "svolab/embeddings.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "support/synthetic.h"

namespace svolab {
namespace {

const char kSmall[] =
    "4 3\n"
    "dog 1 2 3\n"
    "chase 0.5 -0.5 0\n"
    "bone 7 8 9\n"
    "Dog -1 -2 -3\n";

TEST(EmbeddingsTest, ParsesHeaderAndRows) {
  EmbeddingTable t = ParseVectors(kSmall);
  EXPECT_EQ(t.dim(), 3);
  EXPECT_EQ(t.size(), 4u);
  EXPECT_EQ(t.declared_count(), 4u);
  auto v = t.Find("chase");
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(std::vector<double>(v->begin(), v->end()), (std::vector<double>{0.5, -0.5, 0}));
}

TEST(EmbeddingsTest, LookupIsCaseSensitiveUnlessFallback) {
  EmbeddingTable t = ParseVectors(kSmall);
  EXPECT_EQ((*t.Find("Dog"))[0], -1.0);
  EXPECT_FALSE(t.Find("BONE").has_value());
  ASSERT_TRUE(t.Find("BONE", true).has_value());
  EXPECT_EQ((*t.Find("BONE", true))[0], 7.0);
  // Exact match wins over the fallback.
  EXPECT_EQ((*t.Find("Dog", true))[0], -1.0);
}

TEST(EmbeddingsTest, DuplicateKeepsFirstAndWarns) {
  EmbeddingTable t = ParseVectors("2 1\ndog 1\ndog 2\n");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.duplicate_warnings(), 1u);
  EXPECT_EQ((*t.Find("dog"))[0], 1.0);
}

TEST(EmbeddingsTest, HeaderErrors) {
  EXPECT_THROW(ParseVectors(""), HeaderError);
  EXPECT_THROW(ParseVectors("dog 1 2 3\n"), HeaderError);
  EXPECT_THROW(ParseVectors("3\n"), HeaderError);
  EXPECT_THROW(ParseVectors("3 0\n"), HeaderError);
  EXPECT_THROW(ParseVectors("3 2 1\n"), HeaderError);
}

TEST(EmbeddingsTest, RowErrorsCarryLineNumbers) {
  try {
    ParseVectors("2 3\ndog 1 2 3\ncat 1 2\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line_number(), 3u);
  }
  EXPECT_THROW(ParseVectors("1 2\ndog 1 2 3\n"), FormatError);
  EXPECT_THROW(ParseVectors("1 2\ndog 1 x\n"), FormatError);
}

TEST(EmbeddingsTest, AddRejectsWrongLength) {
  EmbeddingTable t(3);
  std::vector<double> two = {1, 2};
  EXPECT_THROW(t.Add("x", two), DimMismatch);
}

TEST(EmbeddingsTest, VectorizeLaysOutVerbThenArguments) {
  EmbeddingTable t = ParseVectors(kSmall);
  std::vector<Triad> triads;
  for (int i = 0; i < 40; ++i) {
    triads.push_back(testing::MakeTriad("c", "s" + std::to_string(i), "dog", "chase", "bone"));
  }
  VectorizeOptions options;
  options.seed = 11;
  options.surface = Surface::kLemma;
  VectorizeResult r = VectorizeTriads(t, triads, options);
  ASSERT_EQ(r.examples.size(), triads.size());
  bool saw_both = false;
  for (std::size_t i = 0; i < r.examples.size(); ++i) {
    const TriadExample& e = r.examples[i];
    ASSERT_EQ(e.features.size(), 9u);
    EXPECT_EQ(e.first_is_subject, SubjectFirstDraw(11, i));
    std::vector<double> expect = {0.5, -0.5, 0};
    std::vector<double> s = {1, 2, 3}, o = {7, 8, 9};
    const auto& a = e.first_is_subject ? s : o;
    const auto& b = e.first_is_subject ? o : s;
    expect.insert(expect.end(), a.begin(), a.end());
    expect.insert(expect.end(), b.begin(), b.end());
    EXPECT_EQ(e.features, expect);
    EXPECT_EQ(e.triad_ref, triads[i].Key());
    saw_both |= e.first_is_subject != r.examples[0].first_is_subject;
  }
  EXPECT_TRUE(saw_both);
}

TEST(EmbeddingsTest, OovTriadsAreSkippedAndCounted) {
  EmbeddingTable t = ParseVectors(kSmall);
  std::vector<Triad> triads = {
      testing::MakeTriad("c", "a", "dog", "chase", "bone"),
      testing::MakeTriad("c", "b", "cat", "chase", "bone"),
      testing::MakeTriad("c", "c", "cat", "eat", "fish"),
  };
  VectorizeOptions options;
  options.surface = Surface::kLemma;
  VectorizeResult r = VectorizeTriads(t, triads, options);
  EXPECT_EQ(r.examples.size(), 1u);
  EXPECT_EQ(r.oov.subject_misses, 2u);
  EXPECT_EQ(r.oov.verb_misses, 1u);
  EXPECT_EQ(r.oov.object_misses, 1u);
  EXPECT_EQ(r.oov.skipped_triads, 2u);
}

TEST(EmbeddingsTest, FeatureLengthMismatch) {
  EmbeddingTable t = ParseVectors(kSmall);
  VectorizeOptions options;
  options.expected_feature_length = 900;
  EXPECT_THROW(VectorizeTriads(t, {}, options), DimMismatch);
}

TEST(EmbeddingsTest, CoinIsRoughlyFairAndSeeded) {
  std::size_t heads = 0, differ = 0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    heads += SubjectFirstDraw(3, i);
    differ += SubjectFirstDraw(3, i) != SubjectFirstDraw(4, i);
  }
  // 4 sigma either side of n/2.
  EXPECT_NEAR(static_cast<double>(heads), n / 2.0, 4 * std::sqrt(n / 4.0));
  EXPECT_NEAR(static_cast<double>(differ), n / 2.0, 4 * std::sqrt(n / 4.0));
}

TEST(EmbeddingsTest, ExampleFileRoundTrip) {
  testing::TempDir dir;
  ExampleSet set;
  set.dim = 4;
  set.seed = 99;
  set.examples = testing::TwoGaussians(25, 12, 1.0, 1, 2);
  WriteExampleFile(dir / "x.bin", set);
  ExampleSet back = ReadExampleFile(dir / "x.bin");
  EXPECT_EQ(back.dim, 4);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(back.examples, set.examples);
}

TEST(EmbeddingsTest, LoadVectorsFromFile) {
  testing::TempDir dir;
  std::string text = testing::VecFileFor({"a", "b", "c"}, 5);
  {
    std::ofstream out(dir / "v.vec");
    out << text;
  }
  EmbeddingTable t = LoadVectors(dir / "v.vec");
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.dim(), 5);
  EXPECT_THROW(LoadVectors(dir / "missing.vec"), std::runtime_error);
}

}  // namespace
}  // namespace svolab
