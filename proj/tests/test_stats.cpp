#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <random>

#include "erepi/rng.hpp"
#include "erepi/stats.hpp"

using namespace erepi;

TEST(Ols, ExactLine) {
  std::vector<Point2> pts;
  for (int t = 0; t < 10; ++t) pts.push_back({double(t), 2.0 - 3.0 * t});
  const auto f = ols_fit(pts);
  EXPECT_NEAR(f.slope, -3.0, 1e-12);
  EXPECT_NEAR(f.intercept, 2.0, 1e-12);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-12);
  EXPECT_EQ(f.n_points, 10u);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Ols, LogRatioIsLinear) {
  std::vector<Point2> pts;
  for (int t = 0; t <= 30; ++t) pts.push_back({double(t), std::log(9999.0 / 10.0) - 0.7 * t});
  EXPECT_NEAR(ols_fit(pts).slope, -0.7, 1e-9);
}

TEST(Ols, HandComputed) {
  const std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 1}};
  const auto f = ols_fit(pts);
  EXPECT_NEAR(f.slope, 0.5, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0 / 6.0, 1e-15);
  // residuals -1/6, 1/3, -1/6: SSE = 1/6, Sxx = 2
  EXPECT_NEAR(f.slope_se, std::sqrt((1.0 / 6.0) / 1.0 / 2.0), 1e-15);
}

TEST(Ols, ResidualsOrthogonalToRegressor) {
  std::mt19937 gen(3);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({i * 0.37 + rep, 1.5 - 0.2 * i + noise(gen)});
    const auto f = ols_fit(pts);
    double mx = 0;
    for (auto p : pts) mx += p.x / pts.size();
    double dot = 0, sum = 0;
    for (auto p : pts) {
      const double r = p.y - f.intercept - f.slope * p.x;
      dot += r * (p.x - mx);
      sum += r;
    }
    EXPECT_NEAR(dot, 0.0, 1e-9);
    EXPECT_NEAR(sum, 0.0, 1e-9);
    EXPECT_GE(f.slope_se, 0.0);
  }
}

TEST(Ols, Degenerate) {
  const std::vector<Point2> same{{1, 0}, {1, 2}, {1, 3}};
  EXPECT_THROW(ols_fit(same), Error);
  const std::vector<Point2> one{{1, 0}};
  EXPECT_THROW(ols_fit(one), Error);
}

TEST(SpecialFunctions, IncompleteBetaMatchesBoost) {
  for (double a : {0.5, 1.0, 2.5, 12.0, 40.0})
    for (double b : {0.5, 1.0, 3.0, 25.0})
      for (double x : {0.0, 1e-4, 0.1, 0.37, 0.5, 0.9, 0.999, 1.0})
        EXPECT_NEAR(incomplete_beta(a, b, x), boost::math::ibeta(a, b, x), 1e-12) << a << " " << b << " " << x;
}

TEST(SpecialFunctions, StudentTMatchesBoost) {
  for (double dof : {1.0, 2.0, 5.0, 24.0, 100.0})
    for (double t : {0.0, 0.3, 1.0, 2.064, 3.4641, 10.0, -2.5}) {
      boost::math::students_t dist(dof);
      const double ref = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
      EXPECT_NEAR(student_t_two_sided(t, dof), ref, 1e-10) << dof << " " << t;
    }
}

TEST(SpecialFunctions, NormalQuantileMatchesBoost) {
  const boost::math::normal nd;
  for (double p : {1e-10, 1e-5, 0.001, 0.025, 0.2, 0.5, 0.7, 0.975, 0.999, 1 - 1e-9})
    EXPECT_NEAR(normal_quantile(p), boost::math::quantile(nd, p), 1e-9 * std::max(1.0, std::abs(boost::math::quantile(nd, p))));
  EXPECT_NEAR(normal_upper_tail(1.959963984540054), 0.025, 1e-12);
}

TEST(TTest, Examples) {
  const std::vector<double> at{0.9, 1.0, 1.1};
  const auto r0 = t_test_one_sample(at, 1.0, 0.05);
  EXPECT_NEAR(r0.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r0.p_value, 1.0, 1e-12);
  EXPECT_FALSE(r0.reject);

  const std::vector<double> s{1.1, 1.2, 1.3};
  const auto r = t_test_one_sample(s, 1.0, 0.05);
  EXPECT_NEAR(r.statistic, 0.2 / (0.1 / std::sqrt(3.0)), 1e-12);
  EXPECT_NEAR(r.statistic, 3.464, 1e-3);
  EXPECT_EQ(r.dof, 2u);
  boost::math::students_t dist(2);
  EXPECT_NEAR(r.p_value, 2 * boost::math::cdf(boost::math::complement(dist, r.statistic)), 1e-12);
  EXPECT_NEAR(r.p_value, 0.0742, 1e-3);
  EXPECT_FALSE(r.reject);

  const std::vector<double> flat{1, 1, 1};
  try {
    t_test_one_sample(flat, 1.0, 0.05);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
}

TEST(TTest, SymmetricUnderReflection) {
  std::mt19937 gen(9);
  std::normal_distribution<double> nd(1.1, 0.3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a, b;
    for (int i = 0; i < 25; ++i) {
      a.push_back(nd(gen));
      b.push_back(2.0 - a.back());
    }
    const auto ra = t_test_one_sample(a, 1.0, 0.05);
    const auto rb = t_test_one_sample(b, 1.0, 0.05);
    EXPECT_NEAR(ra.p_value, rb.p_value, 1e-12);
    EXPECT_NEAR(ra.statistic, -rb.statistic, 1e-12);
    EXPECT_EQ(ra.reject, ra.p_value < 0.05);
    EXPECT_NEAR(ra.statistic, (mean_of(a) - 1.0) / (sample_sd(a) / 5.0), 1e-12);
  }
}

// Reference values computed once with scipy.stats.shapiro.
TEST(ShapiroWilk, MatchesReference) {
  struct Case {
    std::vector<double> x;
    double w, p;
  };
  const std::vector<Case> cases{
      {{1.0, 2.0, 4.0}, 0.9642857142857142, 0.6368868450289689},
      {{1.2, 0.8, 3.3, 1.9, 2.2, 2.0, 5.1}, 0.8994416653991428, 0.32761367936720676},
      {{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.0, 3.9, 4.7}, 0.9779736012494121, 0.9534071854275015},
      {{0.3047, -1.04, 0.7505, 0.9406, -1.951, -1.3022, 0.1278, -0.3162, -0.0168, -0.853, 0.8794, 0.7778, 0.066,
        1.1272, 0.4675, -0.8593, 0.3688, -0.9589, 0.8785, -0.0499, -0.1849, -0.6809, 1.2225, -0.1545, -0.4283},
       0.966776120443715, 0.5648922321601293},
      {{0.4171, 0.4533, 0.0771, 0.1796, 0.6853, 0.3887, 1.2642, 0.7085, 0.2379, 0.4611, 0.6416, 0.3438, 0.3219, 0.8789,
        0.2969, 1.3337, 1.3909, 1.0841, 0.073, 1.1341, 1.3543, 1.122, 0.28, 0.3209, 0.1657, 0.3544, 0.0211, 0.1674,
        1.3151, 3.9958, 0.5635, 0.284, 0.3978, 0.3613, 0.1296, 1.0833, 1.3758, 1.5078, 5.3099, 2.1067},
       0.6683455241550117, 3.057058980261203e-08},
  };
  for (const auto& c : cases) {
    const auto r = shapiro_wilk(c.x);
    EXPECT_NEAR(r.statistic, c.w, 1e-6) << c.x.size();
    EXPECT_NEAR(r.p_value, c.p, 1e-4 * std::max(c.p, 1e-3)) << c.x.size();
    EXPECT_EQ(r.dof, c.x.size());
  }
}

TEST(ShapiroWilk, RejectsBimodal) {
  std::vector<double> x(12, 0.0);
  x.insert(x.end(), 13, 10.0);
  const auto r = shapiro_wilk(x);
  EXPECT_NEAR(r.statistic, 0.6386733234879658, 1e-6);
  EXPECT_TRUE(r.reject);
}

TEST(ShapiroWilk, Errors) {
  const std::vector<double> two{1.0, 2.0};
  try {
    shapiro_wilk(two);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParameter);
  }
  const std::vector<double> ties(10, 3.0);
  try {
    shapiro_wilk(ties);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
  EXPECT_THROW(shapiro_wilk(std::vector<double>(5001, 0.0)), Error);
}

TEST(ShapiroWilk, StatisticInUnitInterval) {
  Rng rng(5, Stream::Sampling);
  for (std::size_t n : {3, 4, 5, 11, 12, 25, 100, 1000}) {
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(rng.normal());
    const auto r = shapiro_wilk(x);
    EXPECT_GT(r.statistic, 0.0);
    EXPECT_LE(r.statistic, 1.0);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
  }
}

TEST(ShapiroWilk, FalseRejectionRate) {
  Rng rng(2024, Stream::Sampling);
  int rejected = 0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(25);
    for (auto& v : x) v = rng.normal();
    rejected += shapiro_wilk(x, 0.05).reject;
  }
  EXPECT_NEAR(rejected / double(trials), 0.05, 0.012);
}

TEST(Rng, StreamsAndRanges) {
  Rng a(7, Stream::Network), b(7, Stream::Dynamics), c(7, Stream::Network);
  EXPECT_NE(a.next(), b.next());
  Rng d(7, Stream::Network);
  EXPECT_EQ(c.next(), d.next());
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}
