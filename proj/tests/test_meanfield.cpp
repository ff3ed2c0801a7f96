#include <gtest/gtest.h>

#include <cmath>

#include "erepi/meanfield.hpp"
#include "oracles.hpp"

using namespace erepi;

TEST(Logistic, Examples) {
  const MeanFieldParams mf{1e4, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(logistic_z(0.0, mf), 1.0);
  EXPECT_NEAR(logistic_z(std::log(9999.0), mf), 5000.0, 1e-9);
  EXPECT_DOUBLE_EQ(logistic_z(1e3, mf), 1e4);
  double prev = 0;
  for (double t = 0; t < 40; t += 0.5) {
    const double z = logistic_z(t, mf);
    EXPECT_GE(z, prev);
    EXPECT_LE(z, 1e4);
    prev = z;
  }
}

// Central difference against the right-hand side of the ODE.
TEST(Logistic, SolvesTheOde) {
  for (const MeanFieldParams mf : {MeanFieldParams{1e4, 1.0, 1.0}, MeanFieldParams{500.0, 20.0, 0.7}}) {
    const double h = 1e-4;
    for (double t = 1.0; t < 15.0; t += 0.7) {
      const double fd = (logistic_z(t + h, mf) - logistic_z(t - h, mf)) / (2 * h);
      const double z = logistic_z(t, mf);
      const double rhs = mf.beta / mf.n_eff * (mf.n_eff - z) * z;
      EXPECT_NEAR(fd / rhs, 1.0, 1e-6) << t;
    }
  }
}

TEST(Ratio, Identities) {
  EXPECT_DOUBLE_EQ(ratio_r(0.0, 3.5, 2.0), 3.5);
  EXPECT_NEAR(ratio_r(0.5, 3.5, 2.0), 3.5 / std::exp(1.0), 1e-15);
  const MeanFieldParams mf{1e4, 1.0, 1.0};
  const double z = logistic_z(5.0, mf);
  const double r = ratio_r(5.0, initial_ratio(mf), 1.0);
  EXPECT_NEAR(r - (1e4 - z) / z, 0.0, 1e-12);
  EXPECT_NEAR(r * z + z, 1e4, 1e-12 * 1e4);
  EXPECT_THROW(ratio_r(1.0, 0.0, 1.0), Error);
}

TEST(CharacteristicTime, ClosedForm) {
  EXPECT_NEAR(characteristic_time({1e4, 1.0, 1.0}), 9.2103, 1e-3);
  EXPECT_NEAR(characteristic_time({1e4, 5e3, 1.0}), 2 * std::log(2.0), 1e-12);
  EXPECT_NEAR(characteristic_time({1e4, 3.0, 2.0}), characteristic_time({1e4, 3.0, 1.0}) / 2, 1e-12);
  EXPECT_THROW(characteristic_time({100.0, 100.0, 1.0}), Error);
}

// int t Z' dt / int Z' dt by Simpson quadrature of the logistic.
TEST(CharacteristicTime, MatchesQuadrature) {
  for (const MeanFieldParams mf : {MeanFieldParams{1e4, 1.0, 1.0}, MeanFieldParams{2000.0, 50.0, 0.4}}) {
    auto zdot = [&](double t) {
      const double z = mf.n_eff * mf.z0 / (mf.z0 + (mf.n_eff - mf.z0) * std::exp(-mf.beta * t));
      return mf.beta / mf.n_eff * (mf.n_eff - z) * z;
    };
    const double end = 80.0 / mf.beta;
    const double num = oracle::simpson([&](double t) { return t * zdot(t); }, 0.0, end, 400000);
    const double den = oracle::simpson(zdot, 0.0, end, 400000);
    EXPECT_NEAR(characteristic_time(mf) / (num / den), 1.0, 1e-6);
  }
}

TEST(AnalyticTRho, Examples) {
  const MeanFieldParams mf{1e4, 1.0, 1.0};
  EXPECT_NEAR(analytic_t_rho(0.5, mf), std::log(9999.0), 1e-12);
  EXPECT_THROW(analytic_t_rho(0.5, {1e4, 5e3, 1.0}), Error);
  EXPECT_THROW(analytic_t_rho(1.0, mf), Error);
  for (double rho : {0.3, 0.75, 0.9}) EXPECT_NEAR(logistic_z(analytic_t_rho(rho, mf), mf), rho * 1e4, 1e-10 * 1e4);
  double prev = -1;
  for (double rho = 0.01; rho < 0.999; rho += 0.01) {
    const double t = analytic_t_rho(rho, mf);
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(MeanFieldParams, Validation) {
  EXPECT_THROW(logistic_z(1.0, {10.0, 0.0, 1.0}), Error);
  EXPECT_THROW(logistic_z(1.0, {10.0, 11.0, 1.0}), Error);
  EXPECT_THROW(logistic_z(1.0, {10.0, 1.0, 0.0}), Error);
  EXPECT_THROW(logistic_z(-1.0, {10.0, 1.0, 1.0}), Error);
}
