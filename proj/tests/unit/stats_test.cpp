#include "emobias/stats.hpp"

#include <gtest/gtest.h>

#include "emobias/error.hpp"
#include "emobias/hashing.hpp"
#include "oracles/oracles.hpp"

namespace emobias {
namespace {

PredictionRecord pred(std::string triple, GenderVariant v, LabelSet labels, bool original = false) {
  PredictionRecord p;
  p.triple_id = triple;
  p.caption_record_id = original ? triple : triple + "~" + std::string(to_string(v));
  p.variant = v;
  p.parsed = labels;
  p.model_name = "m";
  return p;
}

// Frozen reference values (scipy.stats.chi2_contingency / chi2.sf).
TEST(ChiSquare, FrozenYatesValues) {
  struct {
    std::uint64_t a, b, n;
    double chi2, p;
  } const cases[] = {
      {100, 130, 1000, 4.1316629820682875, 0.04208797176717574},
      {3, 9, 20, 2.9761904761904767, 0.08449793972392967},
      {400, 600, 1000, 79.202, 5.607e-19},
  };
  for (const auto& c : cases) {
    const auto r = chi_square({c.a, c.b, c.n});
    EXPECT_TRUE(r.computable);
    EXPECT_TRUE(r.yates);
    EXPECT_EQ(r.df, 1);
    EXPECT_NEAR(r.chi2, c.chi2, 1e-9 * std::max(1.0, c.chi2));
    EXPECT_NEAR(r.p, c.p, 1e-6);
  }
}

TEST(ChiSquare, FrozenUncorrectedValues) {
  auto r = chi_square({100, 130, 1000}, false);
  EXPECT_NEAR(r.chi2, 4.421518054532056, 1e-9);
  EXPECT_NEAR(r.p, 0.03548845046647463, 1e-6);
  EXPECT_FALSE(r.yates);
  r = chi_square({3, 9, 20}, false);
  EXPECT_NEAR(r.chi2, 4.285714285714286, 1e-9);
  EXPECT_NEAR(r.p, 0.03843393023678176, 1e-6);
  EXPECT_NEAR(chi_square({400, 600, 1000}, false).chi2, 80.0, 1e-9);
}

TEST(ChiSquare, EqualCountsGiveExactNull) {
  for (std::uint64_t a : {1, 7, 500, 999}) {
    const auto r = chi_square({a, a, 1000});
    EXPECT_EQ(r.chi2, 0.0);
    EXPECT_EQ(r.p, 1.0);
    EXPECT_TRUE(r.computable);
  }
}

TEST(ChiSquare, DegenerateMargins) {
  EXPECT_FALSE(chi_square({0, 0, 1000}).computable);
  EXPECT_FALSE(chi_square({1000, 1000, 1000}).computable);
  EXPECT_TRUE(chi_square({0, 1, 1000}).computable);
  EXPECT_THROW(chi_square({1001, 0, 1000}), DomainError);
}

TEST(PValue, FrozenTailValues) {
  EXPECT_EQ(p_value_df1(0.0), 1.0);
  const std::pair<double, double> cases[] = {
      {3.841, 0.050013683763956804}, {6.635, 0.009999419574042536}, {7.49, 0.006204255611621437},
      {3.88, 0.04886455736606053},   {1.0, 0.31731050786291115},    {10.0, 0.001565402258002549},
  };
  for (auto [x, p] : cases) EXPECT_NEAR(p_value_df1(x), p, 1e-6) << x;
  EXPECT_THROW(p_value_df1(-1.0), DomainError);
  EXPECT_THROW(p_value_df1(std::nan("")), DomainError);
}

TEST(PValue, MatchesBoostAndDecreases) {
  double prev = 1.0;
  for (double x = 0.01; x < 60.0; x += 0.01) {
    const double p = p_value_df1(x);
    EXPECT_NEAR(p, oracle::chi2_sf_df1(x), 1e-6) << x;
    EXPECT_LT(p, prev) << x;
    EXPECT_GE(p, 0.0);
    prev = p;
  }
  EXPECT_LT(p_value_df1(200.0), 1e-40);
}

TEST(ChiSquareProperty, Symmetric) {
  SeededRng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t n = 1 + rng.uniform_below(1500);
    const std::uint64_t a = rng.uniform_below(n + 1), b = rng.uniform_below(n + 1);
    for (bool yates : {true, false}) {
      const auto x = chi_square({a, b, n}, yates), y = chi_square({b, a, n}, yates);
      EXPECT_EQ(x.chi2, y.chi2);
      EXPECT_EQ(x.p, y.p);
      EXPECT_EQ(x.computable, y.computable);
    }
  }
}

TEST(ChiSquareProperty, PMonotoneInGap) {
  for (std::uint64_t a : {0, 50, 300, 500}) {
    double prev = 1.0;
    for (std::uint64_t b = a; b <= 1000; ++b) {
      const auto r = chi_square({a, b, 1000});
      if (!r.computable) continue;
      EXPECT_LE(r.p, prev) << a << " " << b;
      prev = r.p;
    }
  }
}

TEST(ChiSquareProperty, MatchesCellSumOracle) {
  SeededRng rng(17);
  for (int i = 0; i < 3000; ++i) {
    const std::uint64_t n = 1 + rng.uniform_below(3000);
    const std::uint64_t a = rng.uniform_below(n + 1), b = rng.uniform_below(n + 1);
    for (bool yates : {true, false}) {
      const auto r = chi_square({a, b, n}, yates);
      const auto ref = oracle::yates_reference(a, b, n, yates);
      ASSERT_EQ(r.computable, ref.computable);
      if (!r.computable) continue;
      EXPECT_NEAR(r.chi2, ref.chi2, 1e-6 * std::max(1.0, ref.chi2));
      EXPECT_NEAR(r.p, ref.p, 1e-6);
    }
  }
}

TEST(ChiSquareBatch, ParallelMatchesSerial) {
  std::vector<ContingencyTable> tables;
  SeededRng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t n = 1 + rng.uniform_below(2000);
    tables.push_back({rng.uniform_below(n + 1), rng.uniform_below(n + 1), n});
  }
  EXPECT_EQ(chi_square_batch(tables), chi_square_batch_serial(tables));
  EXPECT_EQ(chi_square_batch(tables, false), chi_square_batch_serial(tables, false));
}

TEST(Align, CountsPresencePerTriple) {
  std::vector<PredictionRecord> log = {
      pred("t1", GenderVariant::Man, {Emotion::Peace, Emotion::Pain}, true),
      pred("t1", GenderVariant::Woman, {Emotion::Peace}),
      pred("t1", GenderVariant::Undefined, {Emotion::Fear}),
      pred("t2", GenderVariant::Woman, {Emotion::Peace, Emotion::Pain}, true),
      pred("t2", GenderVariant::Man, {}),
  };
  const auto aligned = align(log);
  EXPECT_EQ(aligned.triple_ids, (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(aligned.original_man, 1u);
  EXPECT_EQ(aligned.original_woman, 1u);
  EXPECT_EQ(aligned.undefined.size(), 1u);
  EXPECT_EQ(contingency(log, Emotion::Peace), (ContingencyTable{1, 2, 2}));
  EXPECT_EQ(contingency(log, Emotion::Pain), (ContingencyTable{1, 1, 2}));
  EXPECT_EQ(contingency(log, Emotion::Fear), (ContingencyTable{0, 0, 2}));
}

TEST(Align, FlagsInvolutionFailures) {
  std::vector<PredictionRecord> log = {pred("t1", GenderVariant::Man, {}, true),
                                       pred("t1", GenderVariant::Woman, {})};
  log[0].involution_ok = false;
  log[1].involution_ok = false;
  EXPECT_EQ(align(log).flagged_triples, 1u);
}

TEST(Align, RejectsMisalignedLogs) {
  std::vector<PredictionRecord> missing = {pred("t1", GenderVariant::Man, {})};
  EXPECT_THROW(align(missing), AccountingError);
  std::vector<PredictionRecord> twice = {pred("t1", GenderVariant::Man, {}), pred("t1", GenderVariant::Man, {}),
                                         pred("t1", GenderVariant::Woman, {})};
  EXPECT_THROW(align(twice), AccountingError);
}

std::vector<PredictionRecord> random_log(std::size_t triples, std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<PredictionRecord> log;
  for (std::size_t t = 0; t < triples; ++t) {
    const std::string id = "t" + std::to_string(t);
    for (auto v : {GenderVariant::Man, GenderVariant::Woman, GenderVariant::Undefined}) {
      log.push_back(pred(id, v, LabelSet::from_bits(static_cast<std::uint32_t>(rng.uniform_below(1u << 26))),
                         v == GenderVariant::Man));
    }
  }
  return log;
}

TEST(Contingency, ParallelMatchesSerial) {
  const auto aligned = align(random_log(5000, 2));
  EXPECT_EQ(contingency_all(aligned), contingency_all_serial(aligned));
}

TEST(FrequencyTable, ParallelMatchesSerialAndTotals) {
  const auto log = random_log(3000, 8);
  const auto f = frequency_table(log);
  EXPECT_EQ(f, frequency_table_serial(log));
  std::array<std::uint64_t, 3> sizes{};
  for (const auto& p : log) sizes[static_cast<std::size_t>(p.variant)] += p.parsed.size();
  EXPECT_EQ(f.totals, sizes);
  for (std::size_t v = 0; v < 3; ++v) {
    std::uint64_t sum = 0;
    for (std::size_t e = 0; e < kEmotionCount; ++e) sum += f.counts[e][v];
    EXPECT_EQ(sum, f.totals[v]);
  }
}

TEST(FrequencyTable, ThreeLabelsEach) {
  std::vector<PredictionRecord> log;
  for (int i = 0; i < 1000; ++i) {
    log.push_back(pred("t" + std::to_string(i), GenderVariant::Man,
                       {Emotion::Peace, Emotion::Pain, Emotion::Fear}));
  }
  EXPECT_EQ(frequency_table(log).total(GenderVariant::Man), 3000u);
}

TEST(Normalize, Shares) {
  FrequencyTable f;
  f.counts[index_of(Emotion::Peace)] = {10, 10, 10};
  f.counts[index_of(Emotion::Pain)] = {30, 10, 0};
  const auto s = normalize_per_emotion(f);
  ASSERT_TRUE(s[index_of(Emotion::Peace)]);
  for (double x : *s[index_of(Emotion::Peace)]) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
  EXPECT_EQ(*s[index_of(Emotion::Pain)], (VariantShares{0.75, 0.25, 0.0}));
  EXPECT_FALSE(s[index_of(Emotion::Fear)]);
}

}  // namespace
}  // namespace emobias
