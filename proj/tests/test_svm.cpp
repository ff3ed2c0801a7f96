#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "erepi/svm.hpp"

using namespace erepi;

namespace {

// Widest separating slab by scanning directions, then golden-section
// refinement around the best one. Returns the full slab width (0 if the
// classes are not separable).
double brute_force_margin(const std::vector<Point2>& pts, const std::vector<int>& labels) {
  auto width = [&](double th) {
    const double cx = std::cos(th), cy = std::sin(th);
    double lo_pos = INFINITY, hi_neg = -INFINITY;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double v = cx * pts[i].x + cy * pts[i].y;
      if (labels[i] > 0) lo_pos = std::min(lo_pos, v);
      else hi_neg = std::max(hi_neg, v);
    }
    return lo_pos - hi_neg;
  };
  const int steps = 20000;
  double best = -INFINITY, best_th = 0;
  for (int k = 0; k < steps; ++k) {
    const double th = 2 * M_PI * k / steps;
    if (const double w = width(th); w > best) best = w, best_th = th;
  }
  double a = best_th - 2 * M_PI / steps, b = best_th + 2 * M_PI / steps;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (width(c) > width(d)) b = d;
    else a = c;
  }
  return std::max(0.0, width(0.5 * (a + b)));
}

void expect_margin_property(const SeparatrixFit& f, const std::vector<Point2>& pts, const std::vector<int>& labels) {
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_GE(labels[i] * f.signed_distance(pts[i]), f.margin / 2 - 1e-6);
}

}  // namespace

TEST(Svm, TwoPoints) {
  const std::vector<Point2> pts{{0, -1}, {0, 1}};
  const std::vector<int> labels{-1, 1};
  const auto f = svm_linear(pts, labels);
  EXPECT_NEAR(f.slope, 0.0, 1e-6);
  EXPECT_NEAR(f.intercept, 0.0, 1e-6);
  EXPECT_NEAR(f.margin, 2.0, 1e-6);
  EXPECT_TRUE(f.converged);
  EXPECT_DOUBLE_EQ(f.hinge_loss, 0.0);
}

TEST(Svm, MirroredClusters) {
  std::vector<Point2> pts;
  std::vector<int> labels;
  for (auto [x, y] : std::vector<std::pair<double, double>>{{1, 3}, {0, 2.5}, {2, 4}, {-1, 2}, {3, 6}}) {
    pts.push_back({x, y});
    labels.push_back(1);
    pts.push_back({y, x});
    labels.push_back(-1);
  }
  const auto f = svm_linear(pts, labels);
  EXPECT_NEAR(f.slope, 1.0, 1e-4);
  EXPECT_NEAR(f.intercept, 0.0, 1e-3);
  expect_margin_property(f, pts, labels);
}

TEST(Svm, PlantedSeparator) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> ux(0.0, 10.0), uy(-6.0, 8.0);
  std::vector<Point2> pts;
  std::vector<int> labels;
  while (pts.size() < 1000) {
    const double x = ux(gen), y = uy(gen);
    const double d = (y - (-0.5 * x + 1.0)) / std::hypot(0.5, 1.0);
    if (std::abs(d) < 0.1) continue;  // margin 0.2 around the planted line
    pts.push_back({x, y});
    labels.push_back(d > 0 ? 1 : -1);
  }
  const auto f = svm_linear(pts, labels);
  EXPECT_NEAR(f.slope, -0.5, 0.05);
  EXPECT_GE(f.margin, 0.2);
  EXPECT_TRUE(f.converged);
  expect_margin_property(f, pts, labels);
}

TEST(Svm, MarginMatchesBruteForce) {
  std::mt19937 gen(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  int compared = 0;
  for (int rep = 0; rep < 15; ++rep) {
    std::vector<Point2> pts;
    std::vector<int> labels;
    const double gap = 1.0 + 0.2 * rep;
    for (int i = 0; i < 12; ++i) {
      pts.push_back({nd(gen) + gap, nd(gen) + gap});
      labels.push_back(1);
      pts.push_back({nd(gen) - gap, nd(gen) - gap});
      labels.push_back(-1);
    }
    const double ref = brute_force_margin(pts, labels);
    if (ref <= 0.0) continue;
    const auto f = svm_linear(pts, labels);
    EXPECT_NEAR(f.margin / ref, 1.0, 1e-3) << "rep " << rep;
    if (f.converged) expect_margin_property(f, pts, labels);
    ++compared;
  }
  EXPECT_GE(compared, 10);
}

TEST(Svm, Deterministic) {
  const std::vector<Point2> pts{{0, 0}, {1, 2}, {2, 1}, {3, 3}, {0.5, 2.5}};
  const std::vector<int> labels{-1, 1, -1, 1, 1};
  const auto a = svm_linear(pts, labels);
  const auto b = svm_linear(pts, labels);
  EXPECT_EQ(a.slope, b.slope);
  EXPECT_EQ(a.intercept, b.intercept);
  EXPECT_EQ(a.margin, b.margin);
}

TEST(Svm, Errors) {
  const std::vector<Point2> pts{{0, 0}, {1, 1}};
  EXPECT_THROW(svm_linear(pts, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(svm_linear(pts, std::vector<int>{1, 0}), Error);
  EXPECT_THROW(svm_linear(pts, std::vector<int>{1}), Error);
}

TEST(Svm, NonSeparableStillReturnsALine) {
  const std::vector<Point2> pts{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> labels{1, 1, -1, -1};
  const auto f = svm_linear(pts, labels, {1e3, 5000});
  EXPECT_FALSE(f.converged);
  EXPECT_GT(f.hinge_loss, 0.0);
}
