#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "erepi/error.hpp"

namespace erepi {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// ---- ordinary least squares --------------------------------------------

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // homoscedastic standard error of the slope
  std::size_t n_points = 0;
  double r2 = 0.0;
};

inline OlsFit ols_fit(std::span<const Point2> pts) {
  const std::size_t n = pts.size();
  require(n >= 2, ErrorKind::DegenerateInput, "regression needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : pts) {
    const double dx = p.x - mx;
    const double dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, ErrorKind::DegenerateInput, "all regressor values are equal");
  OlsFit fit;
  fit.n_points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - (fit.intercept + fit.slope * p.x);
    sse += r * r;
  }
  fit.slope_se = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

// ---- special functions -------------------------------------------------

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, ErrorKind::InvalidParameter, "incomplete beta needs a, b > 0");
  require(x >= 0.0 && x <= 1.0, ErrorKind::InvalidParameter, "incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
inline double student_t_two_sided(double t, double dof) {
  return incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Standard normal quantile (Wichura's AS 241, PPND16).
inline double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidParameter, "quantile needs p in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

// ---- hypothesis tests ----------------------------------------------------

struct TestResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  bool reject = false;  // p_value < alpha
};

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

/// Two-sided one-sample Student t-test of mean == mu0.
inline TestResult t_test_one_sample(std::span<const double> sample, double mu0, double alpha) {
  require(sample.size() >= 2, ErrorKind::InvalidParameter, "t-test needs at least two values");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  const double sd = sample_sd(sample);
  require(sd > 0.0, ErrorKind::DegenerateInput, "t-test sample has zero variance");
  TestResult r;
  r.dof = sample.size() - 1;
  r.statistic = (mean_of(sample) - mu0) / (sd / std::sqrt(static_cast<double>(sample.size())));
  r.p_value = std::clamp(student_t_two_sided(r.statistic, static_cast<double>(r.dof)), 0.0, 1.0);
  r.reject = r.p_value < alpha;
  return r;
}

namespace detail {

// Horner evaluation as in AS R94: cc[0] + cc[1] x + ... + cc[nord-1] x^(nord-1).
inline double swilk_poly(const double* cc, int nord, double x) {
  double ret = cc[0];
  if (nord > 1) {
    double p = x * cc[nord - 1];
    for (int j = nord - 2; j > 0; --j) p = (p + cc[j]) * x;
    ret += p;
  }
  return ret;
}

}  // namespace detail

/// Shapiro-Wilk normality test, W and p-value after Royston's AS R94.
/// `dof` carries the sample size.
inline TestResult shapiro_wilk(std::span<const double> sample, double alpha = 0.05) {
  const std::size_t n = sample.size();
  require(n >= 3 && n <= 5000, ErrorKind::InvalidParameter,
          "Shapiro-Wilk needs 3 <= size <= 5000, got " + std::to_string(n));
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  require(range > 1e-19 * std::max(1.0, std::abs(x.front())), ErrorKind::DegenerateInput,
          "Shapiro-Wilk sample has no spread");

  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
  static constexpr double g[] = {-2.273, 0.459};

  const std::size_t half = n / 2;
  const auto an = static_cast<double>(n);
  std::vector<double> a(half + 1, 0.0);  // a[1..half], largest coefficient first
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    std::vector<double> m(half + 1, 0.0);
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i) - 0.375) / an25);
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = detail::swilk_poly(c1, 6, rsn) - m[1] / ssumm2;
    std::size_t first = 0;
    double fac = 0.0;
    if (n > 5) {
      first = 3;
      const double a2 = -m[2] / ssumm2 + detail::swilk_poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      first = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = first; i <= half; ++i) a[i] = -m[i] / fac;
  }

  // W is the squared correlation between the ordered sample and the
  // antisymmetric coefficient vector; 1 - W is formed directly.
  double sa = 0.0;
  double sx = 0.0;
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    coef[i] = -a[i + 1];
    coef[n - 1 - i] = a[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    sa += coef[i];
    sx += x[i] / range;
  }
  sa /= an;
  sx /= an;
  double ssa = 0.0;
  double ssx = 0.0;
  double sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double asa = coef[i] - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  TestResult r;
  r.statistic = w;
  r.dof = n;
  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;  // 6 / pi
    constexpr double stqr = 1.04719755119660;  // pi / 3
    r.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
  } else {
    double y = std::log(w1);
    const double xx = std::log(an);
    double mean = 0.0;
    double sd = 0.0;
    bool tiny = false;
    if (n <= 11) {
      const double gamma = detail::swilk_poly(g, 2, an);
      if (y >= gamma) {
        tiny = true;
      } else {
        y = -std::log(gamma - y);
        mean = detail::swilk_poly(c3, 4, an);
        sd = std::exp(detail::swilk_poly(c4, 4, an));
      }
    } else {
      mean = detail::swilk_poly(c5, 4, xx);
      sd = std::exp(detail::swilk_poly(c6, 3, xx));
    }
    r.p_value = tiny ? 1e-99 : normal_upper_tail((y - mean) / sd);
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  r.reject = r.p_value < alpha;
  return r;
}

}  // namespace erepi
