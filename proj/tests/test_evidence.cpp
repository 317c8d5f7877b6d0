#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "trustfuse/error.hpp"
#include "trustfuse/evidence.hpp"

namespace trustfuse {
namespace {

TEST(Evidence, ZeroLogitsGiveOnePlusLn2) {
  const auto e = evidence_from_logits(Logits({0.0, 0.0}));
  EXPECT_NEAR(e[0], 1.0 + std::log(2.0), 1e-15);
  EXPECT_NEAR(e[1], 1.693147, 1e-6);
}

TEST(Evidence, LargeLogitFollowsAsymptote) {
  const auto e = evidence_from_logits(Logits({100.0, 0.0}));
  EXPECT_NEAR(e[0], 101.0, 1e-9);
  EXPECT_NEAR(e[1], 1.693147, 1e-6);
}

TEST(Evidence, MatchesLongDoubleSoftplus) {
  // ln(1 + e^x) + 1 evaluated in extended precision.
  const auto ref = [](long double x) {
    return static_cast<double>(std::log1p(std::exp(x)) + 1.0L);
  };
  const auto e = evidence_from_logits(Logits({1.0, -1.0}));
  EXPECT_NEAR(e[0], 2.313262, 1e-6);
  EXPECT_NEAR(e[1], 1.313262, 1e-6);
  EXPECT_NEAR(e[0], ref(1.0L), 1e-15);
  EXPECT_NEAR(e[1], ref(-1.0L), 1e-15);
}

TEST(Evidence, SoftplusIsContinuousAcrossCutoffs) {
  for (double x : {-kSoftplusLinearCutoff, kSoftplusLinearCutoff}) {
    const double below = softplus(std::nextafter(x, -1e9));
    const double above = softplus(std::nextafter(x, 1e9));
    EXPECT_NEAR(below, above, 1e-12 * std::max(1.0, std::abs(x)));
  }
  EXPECT_TRUE(std::isfinite(softplus(1e308)));
  EXPECT_GE(softplus(-1e308), 0.0);
}

TEST(Evidence, RejectsNonFiniteAndTooFewClasses) {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Logits({0.0, inf}), Error);
  EXPECT_THROW(Logits({nan, 0.0}), Error);
  EXPECT_THROW(Logits({1.0}), Error);
  try {
    Logits({0.0, nan});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(Opinion, FromEvidenceHandCases) {
  const auto vac = opinion_from_evidence(Evidence({1.0, 1.0}));
  EXPECT_EQ(vac.belief(0), 0.0);
  EXPECT_EQ(vac.belief(1), 0.0);
  EXPECT_EQ(vac.uncertainty(), 1.0);

  const auto a = opinion_from_evidence(Evidence({3.0, 1.0}));
  EXPECT_DOUBLE_EQ(a.belief(0), 0.5);
  EXPECT_DOUBLE_EQ(a.belief(1), 0.0);
  EXPECT_DOUBLE_EQ(a.uncertainty(), 0.5);

  const auto b = opinion_from_evidence(Evidence({2.0, 2.0, 2.0}));
  for (double x : b.beliefs()) EXPECT_DOUBLE_EQ(x, 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(b.uncertainty(), 0.5);
}

TEST(Opinion, EvidenceBelowOneIsRejected) {
  try {
    Evidence({0.5, 2.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidEvidence);
  }
}

TEST(Opinion, FromParts) {
  const auto vac = Opinion::from_parts({0.0, 0.0}, 1.0);
  EXPECT_EQ(vac.uncertainty(), 1.0);
  const auto certain = Opinion::from_parts({1.0, 0.0}, 0.0);
  EXPECT_EQ(certain.belief(0), 1.0);
  EXPECT_EQ(certain.uncertainty(), 0.0);
  const auto o = Opinion::from_parts({0.6, 0.2}, 0.2);
  EXPECT_NEAR(o.belief(0), 0.6, 1e-15);
  EXPECT_NEAR(o.belief(1), 0.2, 1e-15);
  EXPECT_NEAR(o.uncertainty(), 0.2, 1e-15);

  // Decimal rounding within tolerance is absorbed.
  const auto r = Opinion::from_parts({0.333333333333, 0.333333333333},
                                     0.333333333333);
  EXPECT_LE(r.normalization_error(), 1e-15);
}

TEST(Opinion, FromPartsErrors) {
  try {
    Opinion::from_parts({-0.1, 0.6}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidOpinion);
  }
  try {
    Opinion::from_parts({0.5, 0.5}, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotNormalized);
  }
  try {
    Opinion::from_parts({0.5, 0.5}, -1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidOpinion);
  }
}

TEST(Opinion, PredictedClass) {
  EXPECT_EQ(predicted_class(Opinion::from_parts({0.5, 0.0, 0.0}, 0.5)), 0u);
  EXPECT_EQ(predicted_class(Opinion::from_parts({0.3, 0.3}, 0.4)), 0u);
  EXPECT_EQ(predicted_class(Opinion::from_parts({0.1, 0.6, 0.1}, 0.2)), 1u);
  EXPECT_EQ(predicted_class(Opinion::vacuous(4)), 0u);
}

TEST(OpinionProperties, NormalizedForRandomLogits) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> classes(2, 8);
  for (int i = 0; i < 20000; ++i) {
    const auto o = opinion_from_logits(
        Logits(testing::random_logit_values(rng, classes(rng), -10.0, 10.0)));
    ASSERT_LE(o.normalization_error(), 1e-12);
    ASSERT_GT(o.uncertainty(), 0.0);
    ASSERT_LE(o.uncertainty(), 1.0);
    for (double b : o.beliefs()) ASSERT_GE(b, 0.0);
  }
}

TEST(OpinionProperties, EvidenceIsMonotone) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-40.0, 40.0);
  for (int i = 0; i < 20000; ++i) {
    double a = unif(rng), b = unif(rng);
    if (a > b) std::swap(a, b);
    ASSERT_LE(softplus(a), softplus(b)) << a << " " << b;
  }
}

TEST(OpinionProperties, EvidenceRoundTrip) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> classes(2, 8);
  for (int i = 0; i < 5000; ++i) {
    const auto e = evidence_from_logits(
        Logits(testing::random_logit_values(rng, classes(rng), -10.0, 10.0)));
    const auto o = opinion_from_evidence(e);
    const double total = static_cast<double>(o.num_classes()) / o.uncertainty();
    for (std::size_t c = 0; c < o.num_classes(); ++c) {
      ASSERT_NEAR(o.belief(c) * total + 1.0, e[c], 1e-9);
    }
  }
}

TEST(OpinionProperties, ArgmaxInvariantUnderExcessScaling) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> excess(0.0, 20.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int i = 0; i < 5000; ++i) {
    std::vector<double> e(5), scaled(5);
    const double k = scale(rng);
    for (std::size_t c = 0; c < e.size(); ++c) {
      const double x = excess(rng);
      e[c] = 1.0 + x;
      scaled[c] = 1.0 + k * x;
    }
    ASSERT_EQ(predicted_class(opinion_from_evidence(Evidence(e))),
              predicted_class(opinion_from_evidence(Evidence(scaled))));
  }
}

}  // namespace
}  // namespace trustfuse
