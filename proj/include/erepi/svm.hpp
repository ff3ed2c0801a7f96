#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "erepi/error.hpp"
#include "erepi/stats.hpp"

namespace erepi {

struct SvmOptions {
  double penalty = 1e3;  // C in 1/2 |w|^2 + C sum hinge
  std::size_t iterations = 200000;  // only used when the classes overlap
};

/// Separating line w . (x, y) + b = 0, reported as y = slope x + intercept.
///
/// When the data are separable (`converged`), (w, b) is scaled so that the
/// closest point has functional margin exactly 1: every point then satisfies
/// label * (w . p + b) >= 1 and `margin` = 2 / |w| is the full width of the
/// empty band around the line.
struct SeparatrixFit {
  double slope = 0.0;
  double intercept = 0.0;
  double margin = 0.0;
  bool converged = false;
  double wx = 0.0;
  double wy = 0.0;
  double b = 0.0;
  double hinge_loss = 0.0;
  std::size_t iterations = 0;

  double decision(Point2 p) const { return wx * p.x + wy * p.y + b; }
  double signed_distance(Point2 p) const { return decision(p) / std::hypot(wx, wy); }
};

namespace detail {

// Exact hard-margin solution in the plane. The band width along a unit normal
// u is min_pos u.x - max_neg u.x; its maximum sits either where u is parallel
// to a positive-negative difference or where u is normal to a difference of
// two points of the same class. Returns false when nothing separates.
inline bool widest_band(std::span<const Point2> q, std::span<const int> labels, double& ux, double& uy,
                        double& offset, double& width) {
  const std::size_t m = q.size();
  width = 0.0;
  bool found = false;
  auto try_dir = [&](double dx, double dy) {
    const double len = std::hypot(dx, dy);
    if (len == 0.0) return;
    dx /= len;
    dy /= len;
    for (int sign : {1, -1}) {
      const double ex = sign * dx, ey = sign * dy;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double v = ex * q[i].x + ey * q[i].y;
        if (labels[i] > 0) lo = std::min(lo, v);
        else hi = std::max(hi, v);
      }
      if (lo - hi > width) {
        width = lo - hi;
        ux = ex;
        uy = ey;
        offset = -(lo + hi) / 2.0;
        found = true;
      }
    }
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double dx = q[i].x - q[j].x, dy = q[i].y - q[j].y;
      if (labels[i] != labels[j]) try_dir(dx, dy);
      else try_dir(-dy, dx);
    }
  return found;
}

}  // namespace detail

/// Linear maximum-margin classifier in the plane.
///
/// Separable data get the exact hard-margin line (O(m^3) candidate scan).
/// Otherwise the soft-margin objective is minimized by full-batch subgradient
/// descent with steps 1 / (t + 1) from the centroid-difference normal, and the
/// iterate (or running average) with the lowest objective is reported. The
/// data are centred and scaled isotropically first. Fully deterministic.
inline SeparatrixFit svm_linear(std::span<const Point2> points, std::span<const int> labels,
                                const SvmOptions& opt = {}) {
  const std::size_t m = points.size();
  require(m == labels.size(), ErrorKind::InvalidParameter, "points and labels differ in length");
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (int l : labels) {
    require(l == 1 || l == -1, ErrorKind::InvalidParameter, "labels must be +1 or -1");
    (l > 0 ? pos : neg)++;
  }
  require(pos > 0 && neg > 0, ErrorKind::InvalidParameter, "both classes must be present");

  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : points) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(m);
  cy /= static_cast<double>(m);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::hypot(p.x - cx, p.y - cy));
  if (scale == 0.0) scale = 1.0;
  std::vector<Point2> q(m);
  for (std::size_t i = 0; i < m; ++i) q[i] = {(points[i].x - cx) / scale, (points[i].y - cy) / scale};

  auto finish = [&](SeparatrixFit& fit, double fx, double fy, double fb) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < m; ++i) hinge += std::max(0.0, 1.0 - labels[i] * (fx * q[i].x + fy * q[i].y + fb));
    fit.hinge_loss = hinge;
    // Undo the centring and scaling: w.(p - c)/s + b = (w/s).p + (b - w.c/s).
    fit.wx = fx / scale;
    fit.wy = fy / scale;
    fit.b = fb - (fx * cx + fy * cy) / scale;
    fit.margin = 2.0 / std::hypot(fit.wx, fit.wy);
    fit.slope = -fit.wx / fit.wy;
    fit.intercept = -fit.b / fit.wy;
  };

  if (double ux = 0.0, uy = 1.0, off = 0.0, width = 0.0; detail::widest_band(q, labels, ux, uy, off, width)) {
    // unit functional margin: |w| = 2 / width
    const double k = 2.0 / width;
    SeparatrixFit fit;
    finish(fit, k * ux, k * uy, k * off);
    fit.hinge_loss = 0.0;
    fit.converged = true;
    return fit;
  }

  double px = 0.0, py = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] > 0) {
      px += q[i].x;
      py += q[i].y;
    } else {
      nx += q[i].x;
      ny += q[i].y;
    }
  }
  px /= static_cast<double>(pos);
  py /= static_cast<double>(pos);
  nx /= static_cast<double>(neg);
  ny /= static_cast<double>(neg);
  double wx = px - nx;
  double wy = py - ny;
  if (wx == 0.0 && wy == 0.0) wy = 1.0;
  double b = -(wx * (px + nx) + wy * (py + ny)) / 2.0;

  const double C = opt.penalty;
  auto objective = [&](double ax, double ay, double ab, double* hinge) {
    double h = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      h += std::max(0.0, 1.0 - labels[i] * (ax * q[i].x + ay * q[i].y + ab));
    *hinge = h;
    return 0.5 * (ax * ax + ay * ay) + C * h;
  };
  double best_obj = std::numeric_limits<double>::infinity();
  double ox = wx, oy = wy, ob = b;
  auto consider = [&] {
    double h = 0.0;
    const double f = objective(wx, wy, b, &h);
    if (f < best_obj) {
      best_obj = f;
      ox = wx;
      oy = wy;
      ob = b;
    }
  };
  consider();

  // F is 1-strongly convex in w, so steps 1 / t (Pegasos schedule). The
  // running average of the iterates is tracked as a second candidate.
  double ax = wx, ay = wy, ab = b;
  for (std::size_t it = 1; it <= opt.iterations; ++it) {
    double gx = wx;
    double gy = wy;
    double gb = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (labels[i] * (wx * q[i].x + wy * q[i].y + b) < 1.0) {
        gx -= C * labels[i] * q[i].x;
        gy -= C * labels[i] * q[i].y;
        gb -= C * labels[i];
      }
    }
    const double eta = 1.0 / static_cast<double>(it + 1);
    wx -= eta * gx;
    wy -= eta * gy;
    b -= eta * gb;
    consider();
    const double keep = static_cast<double>(it) / static_cast<double>(it + 1);
    ax = keep * ax + (1.0 - keep) * wx;
    ay = keep * ay + (1.0 - keep) * wy;
    ab = keep * ab + (1.0 - keep) * b;
    std::swap(ax, wx);
    std::swap(ay, wy);
    std::swap(ab, b);
    consider();
    std::swap(ax, wx);
    std::swap(ay, wy);
    std::swap(ab, b);
  }

  SeparatrixFit fit;
  fit.iterations = opt.iterations;
  finish(fit, ox, oy, ob);
  return fit;
}

}  // namespace erepi
