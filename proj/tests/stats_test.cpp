#include "tabsynth/stats.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <vector>

#include "tabsynth/error.hpp"
#include "test_rng.hpp"

namespace tabsynth {
namespace {

double boost_two_sided(double t, double df) {
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

const std::vector<double> kA{0.61, 0.70, 0.58, 0.66, 0.72, 0.63, 0.59, 0.65, 0.69, 0.60, 0.64, 0.67};
const std::vector<double> kB{0.73, 0.78, 0.69, 0.80, 0.74, 0.71, 0.77, 0.70, 0.79, 0.72, 0.75, 0.76};

TEST(Aggregate, MeanAndSampleStd) {
  const std::vector<double> v{0.6, 0.7, 0.8};
  const auto m = aggregate(v);
  EXPECT_NEAR(m.mean, 0.7, 1e-15);
  EXPECT_NEAR(m.std, 0.1, 1e-15);
  EXPECT_EQ(m.n, 3u);
  EXPECT_EQ(format_mean_std(m), "0.700±0.100");
  const std::vector<double> same(4, 0.25);
  EXPECT_EQ(aggregate(same).std, 0.0);
  EXPECT_EQ(format_mean_std(aggregate(same)), "0.250±0.000");
  EXPECT_EQ(format_mean_std({0.638, 0.060, 12}), "0.638±0.060");
  EXPECT_THROW(aggregate(std::vector<double>{1.0}), InsufficientDataError);

  const std::vector<std::optional<double>> gaps{0.5, std::nullopt, 0.7};
  EXPECT_NEAR(aggregate(gaps).mean, 0.6, 1e-15);
  EXPECT_EQ(aggregate(gaps).n, 2u);
  EXPECT_THROW(aggregate(std::vector<std::optional<double>>{0.5, std::nullopt}), InsufficientDataError);
}

TEST(TTest, HandExample) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 3, 4, 5, 6};
  const auto r = ttest_two_sample(a, b);
  EXPECT_EQ(r.t, -1.0);
  EXPECT_EQ(r.df, 8.0);
  EXPECT_NEAR(r.p, boost_two_sided(-1.0, 8.0), 1e-12);
  EXPECT_NEAR(r.p, 0.34659350708733416, 1e-12);  // scipy.stats.ttest_ind
}

TEST(TTest, FixtureAgainstOracles) {
  const auto ind = ttest_two_sample(kA, kB);
  EXPECT_NEAR(ind.t, -6.005461994758759, 1e-10);
  EXPECT_EQ(ind.df, 22.0);
  EXPECT_NEAR(ind.p, 4.81161707197218e-06, 1e-15);
  EXPECT_NEAR(ind.p, boost_two_sided(ind.t, ind.df), 1e-15);

  const auto paired = ttest_paired(kA, kB);
  EXPECT_NEAR(paired.t, -8.379305815963917, 1e-10);
  EXPECT_EQ(paired.df, 11.0);
  EXPECT_NEAR(paired.p, 4.193824014112435e-06, 1e-15);
}

TEST(TTest, EqualInputsAndDegenerate) {
  const auto r = ttest_two_sample(kA, kA);
  EXPECT_EQ(r.t, 0.0);
  EXPECT_EQ(r.p, 1.0);
  const std::vector<double> c(5, 0.3);
  EXPECT_THROW(ttest_two_sample(c, c), DegenerateDataError);
  EXPECT_THROW(ttest_two_sample(std::vector<double>{1.0}, kA), InsufficientDataError);
  EXPECT_THROW(ttest_paired(kA, std::vector<double>{1.0, 2.0}), ValidationError);
}

TEST(TTest, AntisymmetricUnderSwap) {
  test::SplitMix64 g(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> a, b;
    const int na = 3 + g.below(20), nb = 3 + g.below(20);
    for (int k = 0; k < na; ++k) a.push_back(g.uniform());
    for (int k = 0; k < nb; ++k) b.push_back(g.uniform() + 0.1);
    const auto ab = ttest_two_sample(a, b);
    const auto ba = ttest_two_sample(b, a);
    EXPECT_NEAR(ab.t, -ba.t, 1e-12);
    EXPECT_NEAR(ab.p, ba.p, 1e-14);
    EXPECT_NEAR(ab.p, boost_two_sided(ab.t, ab.df), 1e-12);
  }
}

TEST(StudentT, MatchesBoostAcrossRange) {
  for (double df : {1.0, 2.0, 3.5, 8.0, 22.0, 100.0, 1000.0}) {
    for (double t : {0.0, 0.1, 0.7, 1.0, 2.0, 3.0, 6.0, 12.0}) {
      const double want = boost_two_sided(t, df);
      EXPECT_NEAR(student_t_two_sided_p(t, df), want, 1e-12 + 1e-10 * want) << t << " " << df;
    }
  }
}

TEST(IncompleteBeta, MatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 11.0}) {
    for (double b : {0.5, 3.0, 20.0}) {
      for (double x : {0.0, 0.01, 0.3, 0.5, 0.9, 1.0}) {
        EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-13) << a << " " << b << " " << x;
      }
    }
  }
}

TEST(DagostinoPearson, MatchesScipy) {
  struct Case {
    std::vector<double> x;
    double k2, p;
  };
  const Case cases[] = {
      {test::triangular_sample(1, 500), 29.20216413800597, 4.558590988169254e-07},
      {test::squared_uniform_sample(2, 500), 79.12992311369825, 6.563802714172096e-18},
      {test::irwin_hall_sample(3, 500), 6.853563448599683, 0.0324913387780738},
      {test::irwin_hall_sample(7, 12), 2.5016329747951116, 0.2862709647776791},
  };
  for (const auto& c : cases) {
    const auto r = dagostino_pearson(c.x);
    EXPECT_NEAR(r.k2, c.k2, 1e-9);
    EXPECT_NEAR(r.p, c.p, 1e-6);
    EXPECT_NEAR(r.p, c.p, 1e-9 * c.p + 1e-15);
  }
  EXPECT_LT(dagostino_pearson(test::squared_uniform_sample(2, 500)).p, 1e-3);
}

TEST(DagostinoPearson, Errors) {
  EXPECT_THROW(dagostino_pearson(test::irwin_hall_sample(1, 7)), InsufficientDataError);
  EXPECT_NO_THROW(dagostino_pearson(test::irwin_hall_sample(1, 8)));
  EXPECT_THROW(dagostino_pearson(std::vector<double>(20, 1.0)), DegenerateDataError);
}

TEST(SignificanceMarker, Thresholds) {
  EXPECT_EQ(significance_marker(0.001), "*");
  EXPECT_EQ(significance_marker(0.0499), "*");
  EXPECT_EQ(significance_marker(0.05), "◇");
  EXPECT_EQ(significance_marker(0.0999), "◇");
  EXPECT_EQ(significance_marker(0.1), "");
  EXPECT_EQ(significance_marker(0.9), "");
}

}  // namespace
}  // namespace tabsynth
