// Copyright 2026 The shadow-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shadowaudit/metrics.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "shadowaudit/rng.hpp"

namespace shadowaudit {
namespace {

using enum OrientationClass;

ErrorCode catch_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const AuditError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected AuditError";
  return ErrorCode::IoError;
}

// ---------------------------------------------------------------------------
// Cohen's kappa.

TEST(Kappa, BinaryHandExample) {
  // Collapsed binary matrix: TP=40, FN=10, FP=20, TN=30.
  // Pr(a) = 70/100, Pr(e) = (50/100)(60/100) + (50/100)(40/100) = 0.5,
  // so kappa = (0.7 - 0.5) / (1 - 0.5) = 0.4.
  ConfusionMatrix cm;
  cm.add(FF, FF, 40);
  cm.add(FF, FM, 10);
  cm.add(FM, FF, 20);
  cm.add(FM, FM, 30);
  EXPECT_NEAR(kappa(cm), 0.4, 1e-12);
}

TEST(Kappa, PerfectAgreementIsOne) {
  ConfusionMatrix cm;
  cm.add(HeF, HeF, 12);
  cm.add(BiM, BiM, 3);
  cm.add(HoM, HoM, 7);
  EXPECT_DOUBLE_EQ(kappa(cm), 1.0);
}

TEST(Kappa, IndependentPredictionsScoreZero) {
  // Prediction independent of truth: cell (t, p) = row_t * col_p / total,
  // which makes Pr(a) equal Pr(e) exactly.
  ConfusionMatrix cm;
  cm.add(FF, FF, 9);
  cm.add(FF, FM, 3);
  cm.add(FM, FF, 3);
  cm.add(FM, FM, 1);
  EXPECT_NEAR(kappa(cm), 0.0, 1e-12);
}

TEST(Kappa, DegenerateCasesThrow) {
  ConfusionMatrix empty;
  EXPECT_EQ(catch_code([&] { kappa(empty); }), ErrorCode::DegenerateAgreement);

  ConfusionMatrix single;  // every subject in one cell -> Pr(e) = 1
  single.add(HeM, HeM, 5);
  EXPECT_EQ(catch_code([&] { kappa(single); }), ErrorCode::DegenerateAgreement);

  ConfusionMatrix only_unclassified;
  only_unclassified.add_unclassified(HeF, 4);
  EXPECT_EQ(catch_code([&] { kappa(only_unclassified); }),
            ErrorCode::DegenerateAgreement);
}

TEST(Kappa, UnclassifiedSubjectsDoNotAffectAgreement) {
  ConfusionMatrix cm;
  cm.add(FF, FF, 40);
  cm.add(FF, FM, 10);
  cm.add(FM, FF, 20);
  cm.add(FM, FM, 30);
  const double before = kappa(cm);
  cm.add_unclassified(FF, 500);
  cm.add_unclassified(BiF, 17);
  EXPECT_DOUBLE_EQ(kappa(cm), before);
}

TEST(Kappa, InvariantUnderClassRelabeling) {
  // Simultaneously permuting truth and prediction labels must not change
  // kappa: it only depends on the diagonal mass and the marginals' pairing.
  Rng rng(0xCA11);
  for (int trial = 0; trial < 50; ++trial) {
    ConfusionMatrix cm;
    for (OrientationClass t : kAllClasses) {
      for (OrientationClass p : kAllClasses) {
        cm.add(t, p, rng.uniform_below(6));
      }
    }
    cm.add(FF, FM);  // ensure at least two occupied marginals

    std::vector<std::size_t> perm(kNumClasses);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    ConfusionMatrix relabeled;
    for (OrientationClass t : kAllClasses) {
      for (OrientationClass p : kAllClasses) {
        relabeled.add(kAllClasses[perm[static_cast<std::size_t>(t)]],
                      kAllClasses[perm[static_cast<std::size_t>(p)]], cm.count(t, p));
      }
    }
    EXPECT_NEAR(kappa(cm), kappa(relabeled), 1e-12) << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------
// Confusion-matrix bookkeeping and per-class scores.

TEST(ConfusionMatrixTest, TotalsAndBulkAdds) {
  ConfusionMatrix unit;
  for (int i = 0; i < 7; ++i) unit.add(HeF, HoM);
  for (int i = 0; i < 3; ++i) unit.add_unclassified(HeF);
  ConfusionMatrix bulk;
  bulk.add(HeF, HoM, 7);
  bulk.add_unclassified(HeF, 3);
  EXPECT_EQ(unit, bulk);

  EXPECT_EQ(bulk.count(HeF, HoM), 7u);
  EXPECT_EQ(bulk.row_total(HeF), 7u);
  EXPECT_EQ(bulk.col_total(HoM), 7u);
  EXPECT_EQ(bulk.unclassified(HeF), 3u);
  EXPECT_EQ(bulk.subject_total(HeF), 10u);
  EXPECT_EQ(bulk.classified_total(), 7u);
  EXPECT_EQ(bulk.unclassified_total(), 3u);
  EXPECT_EQ(bulk.total(), 10u);
  EXPECT_EQ(bulk.diagonal_total(), 0u);
}

TEST(ClassScoresTest, HandExampleWithUnclassified) {
  // Truth HeF: 6 correct, 4 predicted HoM, 5 never classified.
  // Truth HoM: 5 correct, 3 predicted HeF.
  ConfusionMatrix cm;
  cm.add(HeF, HeF, 6);
  cm.add(HeF, HoM, 4);
  cm.add(HoM, HoM, 5);
  cm.add(HoM, HeF, 3);
  cm.add_unclassified(HeF, 5);

  const ClassScores s = class_scores(cm);
  const ClassScore& hef = s.per_class[static_cast<std::size_t>(HeF)];
  EXPECT_EQ(hef.subjects, 15u);
  EXPECT_DOUBLE_EQ(hef.precision, 6.0 / 9.0);
  EXPECT_DOUBLE_EQ(hef.recall, 6.0 / 15.0);  // unclassified in denominator
  EXPECT_DOUBLE_EQ(hef.base_rate, 15.0 / 23.0);
  // Binary collapse: tp=6 fn=4 fp=3 tn=5 over the 18 classified.
  // Pr(a) = 11/18, Pr(e) = (10/18)(9/18) + (8/18)(9/18) = 1/2.
  EXPECT_NEAR(hef.kappa, (11.0 / 18.0 - 0.5) / 0.5, 1e-12);

  const ClassScore& hom = s.per_class[static_cast<std::size_t>(HoM)];
  EXPECT_EQ(hom.subjects, 8u);
  EXPECT_DOUBLE_EQ(hom.precision, 5.0 / 9.0);
  EXPECT_DOUBLE_EQ(hom.recall, 5.0 / 8.0);
  EXPECT_NEAR(hom.kappa, 2.0 / 9.0, 1e-12);

  // Classes with no subjects and no predictions: all-zero scores, and they
  // stay out of the mean.
  const ClassScore& bim = s.per_class[static_cast<std::size_t>(BiM)];
  EXPECT_EQ(bim.subjects, 0u);
  EXPECT_DOUBLE_EQ(bim.kappa, 0.0);
  EXPECT_NEAR(s.mean_kappa, 2.0 / 9.0, 1e-12);
}

TEST(ClassScoresTest, UnclassifiedOnlyClassCountsTowardMean) {
  // A class whose subjects were all unclassified has recall 0 and a
  // degenerate binary kappa of 0, but it does have subjects, so the 0
  // enters the mean.
  ConfusionMatrix cm;
  cm.add(FF, FF, 4);
  cm.add(FF, FM, 1);
  cm.add(FM, FM, 4);
  cm.add(FM, FF, 1);
  cm.add_unclassified(HoF, 6);

  const ClassScores s = class_scores(cm);
  const ClassScore& hof = s.per_class[static_cast<std::size_t>(HoF)];
  EXPECT_EQ(hof.subjects, 6u);
  EXPECT_DOUBLE_EQ(hof.recall, 0.0);
  EXPECT_DOUBLE_EQ(hof.kappa, 0.0);
  // FF and FM are symmetric: tp=4 fn=1 fp=1 tn=4 -> pa=0.8, pe=0.5, k=0.6.
  const double k_ff = s.per_class[static_cast<std::size_t>(FF)].kappa;
  EXPECT_NEAR(k_ff, 0.6, 1e-12);
  EXPECT_NEAR(s.mean_kappa, (k_ff + k_ff + 0.0) / 3.0, 1e-12);
}

TEST(ClassScoresTest, EmptyMatrixThrows) {
  ConfusionMatrix cm;
  EXPECT_EQ(catch_code([&] { class_scores(cm); }), ErrorCode::DegenerateAgreement);
}

// ---------------------------------------------------------------------------
// Leak-factor regression.

TEST(LeakFactor, HandExampleAgainstClosedForms) {
  // Points (0,0), (1,1), (2,3): slope 3/2, intercept -1/6, SSR 1/6, and
  // with one degree of freedom the t distribution is Cauchy, so the
  // two-sided p-value has the closed form 1 - 2*atan(|t|)/pi.
  const LeakFactorEstimate est = ols_leak_factor({{0, 0}, {1, 1}, {2, 3}});
  EXPECT_EQ(est.n_points, 3u);
  EXPECT_FALSE(est.perfect_fit);
  EXPECT_NEAR(est.slope, 1.5, 1e-12);
  EXPECT_NEAR(est.intercept, -1.0 / 6.0, 1e-12);
  EXPECT_NEAR(est.std_error, std::sqrt(1.0 / 12.0), 1e-12);
  EXPECT_NEAR(est.t_stat, 1.5 / std::sqrt(1.0 / 12.0), 1e-12);
  const double p_cauchy = 1.0 - 2.0 * std::atan(std::abs(est.t_stat)) / std::numbers::pi;
  EXPECT_NEAR(est.p_value, p_cauchy, 1e-12);
}

TEST(LeakFactor, TwoDofPValueMatchesAlgebraicForm) {
  // With 4 points the test has 2 dof, where the two-sided p-value is
  // exactly 1 - |t|/sqrt(2 + t^2).
  const LeakFactorEstimate est = ols_leak_factor({{0, 0.1}, {1, 0.9}, {2, 2.3}, {3, 2.8}});
  ASSERT_EQ(est.n_points, 4u);
  ASSERT_FALSE(est.perfect_fit);
  const double t = std::abs(est.t_stat);
  EXPECT_NEAR(est.p_value, 1.0 - t / std::sqrt(2.0 + t * t), 1e-12);
}

TEST(LeakFactor, RandomizedNormalEquationsOracle) {
  // Independent slope/intercept recount via the uncentered normal
  // equations; the centered implementation must agree.
  Rng rng(0x015A);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.uniform_below(20);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(rng.uniform_below(50)) / 7.0;
      const double y = 2.0 * x - 1.0 + 4.0 * (rng.uniform01() - 0.5);
      pts.push_back({x, y});
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (denom == 0.0) continue;  // all x equal; covered by the error test
    const double slope = (dn * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / dn;

    const LeakFactorEstimate est = ols_leak_factor(pts);
    EXPECT_NEAR(est.slope, slope, 1e-9 * std::max(1.0, std::abs(slope)));
    EXPECT_NEAR(est.intercept, intercept, 1e-9 * std::max(1.0, std::abs(intercept)));
    EXPECT_GE(est.p_value, 0.0);
    EXPECT_LE(est.p_value, 1.0);
  }
}

TEST(LeakFactor, NegativeSlopeIsTwoSidedSymmetric) {
  const LeakFactorEstimate pos = ols_leak_factor({{0, 0}, {1, 1}, {2, 3}});
  const LeakFactorEstimate neg = ols_leak_factor({{0, 0}, {1, -1}, {2, -3}});
  EXPECT_DOUBLE_EQ(neg.slope, -pos.slope);
  EXPECT_DOUBLE_EQ(neg.p_value, pos.p_value);
}

TEST(LeakFactor, PerfectFitFlagsAndZeroPValue) {
  const LeakFactorEstimate est = ols_leak_factor({{0, 1}, {1, 3}, {2, 5}, {3, 7}});
  EXPECT_TRUE(est.perfect_fit);
  EXPECT_DOUBLE_EQ(est.slope, 2.0);
  EXPECT_DOUBLE_EQ(est.intercept, 1.0);
  EXPECT_DOUBLE_EQ(est.std_error, 0.0);
  EXPECT_DOUBLE_EQ(est.p_value, 0.0);
}

TEST(LeakFactor, ErrorTaxonomy) {
  EXPECT_EQ(catch_code([&] { ols_leak_factor({{0, 0}, {1, 1}}); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(catch_code([&] { ols_leak_factor({{2, 0}, {2, 1}, {2, 5}}); }),
            ErrorCode::ConstantX);
}

// ---------------------------------------------------------------------------
// Student t helpers.

TEST(StudentT, CdfAndTwoSidedBasics) {
  EXPECT_NEAR(student_t_cdf(0.0, 5.0), 0.5, 1e-12);
  EXPECT_NEAR(two_sided_t_pvalue(0.0, 5.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(two_sided_t_pvalue(-2.5, 7.0), two_sided_t_pvalue(2.5, 7.0));
  // Cauchy closed form at 1 dof.
  EXPECT_NEAR(two_sided_t_pvalue(1.0, 1.0), 0.5, 1e-12);
  // Monotone in |t|.
  EXPECT_LT(two_sided_t_pvalue(3.0, 9.0), two_sided_t_pvalue(1.0, 9.0));
}

// ---------------------------------------------------------------------------
// Spearman.

TEST(Spearman, MonotoneNonlinearIsExactlyOne) {
  const SpearmanResult r = spearman({{1, 1}, {2, 4}, {3, 9}, {4, 16}});
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_DOUBLE_EQ(r.p_value, 0.0);
  EXPECT_EQ(r.n_points, 4u);

  const SpearmanResult neg = spearman({{1, 16}, {2, 9}, {3, 4}, {4, 1}});
  EXPECT_DOUBLE_EQ(neg.rho, -1.0);
  EXPECT_DOUBLE_EQ(neg.p_value, 0.0);
}

TEST(Spearman, AverageRanksForTies) {
  // x = {1,2,2,3} ranks {1, 2.5, 2.5, 4}; y strictly increasing ranks
  // {1,2,3,4}. rho = 4.5 / sqrt(4.5 * 5).
  const SpearmanResult r = spearman({{1, 10}, {2, 20}, {2, 30}, {3, 40}});
  EXPECT_NEAR(r.rho, 4.5 / std::sqrt(4.5 * 5.0), 1e-12);
  EXPECT_LT(r.p_value, 1.0);
  EXPECT_GT(r.p_value, 0.0);
}

TEST(Spearman, InsensitiveToMonotoneTransforms) {
  Rng rng(0x09EA);
  std::vector<std::pair<double, double>> pts, warped;
  for (int i = 0; i < 25; ++i) {
    const double x = rng.uniform01() * 10.0;
    const double y = rng.uniform01() * 10.0 - x;
    pts.push_back({x, y});
    warped.push_back({std::exp(x / 3.0), std::atan(y)});  // strictly monotone maps
  }
  const SpearmanResult a = spearman(pts);
  const SpearmanResult b = spearman(warped);
  EXPECT_NEAR(a.rho, b.rho, 1e-12);
  EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
}

TEST(Spearman, ErrorTaxonomy) {
  EXPECT_EQ(catch_code([&] { spearman({{0, 0}, {1, 1}}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(catch_code([&] { spearman({{1, 0}, {1, 1}, {1, 2}}); }),
            ErrorCode::ConstantX);
  EXPECT_EQ(catch_code([&] { spearman({{0, 5}, {1, 5}, {2, 5}}); }),
            ErrorCode::ConstantX);
}

TEST(AverageRanks, HandCases) {
  EXPECT_EQ(detail::average_ranks({3.0, 1.0, 2.0}),
            (std::vector<double>{3.0, 1.0, 2.0}));
  // Ties share the average of the positions they span.
  EXPECT_EQ(detail::average_ranks({5.0, 5.0, 1.0}),
            (std::vector<double>{2.5, 2.5, 1.0}));
  EXPECT_EQ(detail::average_ranks({2.0, 2.0, 2.0, 2.0}),
            (std::vector<double>{2.5, 2.5, 2.5, 2.5}));
}

// ---------------------------------------------------------------------------
// Binned TPR.

TEST(BinnedTpr, EdgeOwnershipAndFinalBinClosure) {
  // Edges {0,1,2,3}: interior edges open the next bin; the last bin keeps
  // its right endpoint; values outside the range are dropped.
  std::vector<TprSubject> subjects = {
      {0.0, true, true},    // bin 0
      {0.999, true, false}, // bin 0
      {1.0, true, true},    // bin 1 (edge belongs to the bin starting there)
      {2.5, false, false},  // bin 2, population only
      {3.0, true, true},    // bin 2 (final bin right-closed)
      {3.5, true, true},    // dropped
      {-0.1, true, true},   // dropped
  };
  const std::vector<TprBin> bins = binned_tpr(subjects, {0, 1, 2, 3});
  ASSERT_EQ(bins.size(), 3u);

  EXPECT_DOUBLE_EQ(bins[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(bins[0].hi, 1.0);
  EXPECT_EQ(bins[0].population, 2u);
  EXPECT_EQ(bins[0].classified, 2u);
  EXPECT_EQ(bins[0].correct, 1u);
  ASSERT_TRUE(bins[0].tpr.has_value());
  EXPECT_DOUBLE_EQ(*bins[0].tpr, 0.5);

  EXPECT_EQ(bins[1].population, 1u);
  ASSERT_TRUE(bins[1].tpr.has_value());
  EXPECT_DOUBLE_EQ(*bins[1].tpr, 1.0);

  EXPECT_EQ(bins[2].population, 2u);
  EXPECT_EQ(bins[2].classified, 1u);
  EXPECT_EQ(bins[2].correct, 1u);
  ASSERT_TRUE(bins[2].tpr.has_value());
  EXPECT_DOUBLE_EQ(*bins[2].tpr, 1.0);
}

TEST(BinnedTpr, UndefinedBinsCarryNoValue) {
  // Population without a single classified subject: TPR undefined, not 0.
  const std::vector<TprSubject> subjects = {{0.5, false, false}};
  const std::vector<TprBin> bins = binned_tpr(subjects, {0, 1, 2});
  EXPECT_EQ(bins[0].population, 1u);
  EXPECT_EQ(bins[0].classified, 0u);
  EXPECT_FALSE(bins[0].tpr.has_value());
  EXPECT_EQ(bins[1].population, 0u);
  EXPECT_FALSE(bins[1].tpr.has_value());
}

TEST(BinnedTpr, TprDividesByClassifiedNotPopulation) {
  const std::vector<TprSubject> subjects = {
      {0.5, true, true}, {0.5, true, true}, {0.5, true, false}, {0.5, false, false}};
  const std::vector<TprBin> bins = binned_tpr(subjects, {0, 1});
  EXPECT_EQ(bins[0].population, 4u);
  ASSERT_TRUE(bins[0].tpr.has_value());
  EXPECT_DOUBLE_EQ(*bins[0].tpr, 2.0 / 3.0);
}

TEST(BinnedTpr, ErrorTaxonomy) {
  EXPECT_EQ(catch_code([&] { binned_tpr({}, {1.0}); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(catch_code([&] { binned_tpr({}, {0.0, 0.0, 1.0}); }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(catch_code([&] { binned_tpr({}, {1.0, 0.5}); }), ErrorCode::InvalidConfig);
}

}  // namespace
}  // namespace shadowaudit
