#pragma once

#include <algorithm>
#include <cmath>

#include "erepi/error.hpp"

namespace erepi {

/// Parameters of the logistic law-of-mass-action model
///   Z'(t) = (beta / N) (N - Z) Z,   Z(0) = z0.
/// `n_eff` is the population the dynamics live on: the whole network, or the
/// largest component when the process is confined to it.
struct MeanFieldParams {
  double n_eff = 0.0;
  double z0 = 0.0;
  double beta = 1.0;

  void validate() const {
    require(z0 > 0.0 && z0 <= n_eff, ErrorKind::InvalidParameter, "need 0 < z0 <= n_eff");
    require(beta > 0.0, ErrorKind::InvalidParameter, "beta must be positive");
  }
};

// N z0 / (z0 + (N - z0) exp(-beta t)), clamped to [z0, N].
inline double logistic_z(double t, const MeanFieldParams& mf) {
  mf.validate();
  require(t >= 0.0, ErrorKind::InvalidParameter, "t must be >= 0");
  const double z = mf.n_eff * mf.z0 / (mf.z0 + (mf.n_eff - mf.z0) * std::exp(-mf.beta * t));
  return std::clamp(z, mf.z0, mf.n_eff);
}

// Susceptible/infected ratio R(t) = r0 exp(-beta t).
inline double ratio_r(double t, double r0, double beta) {
  require(r0 > 0.0, ErrorKind::InvalidParameter, "r0 must be positive");
  require(t >= 0.0, ErrorKind::InvalidParameter, "t must be >= 0");
  return r0 * std::exp(-beta * t);
}

inline double initial_ratio(const MeanFieldParams& mf) { return (mf.n_eff - mf.z0) / mf.z0; }

/// Derivative-weighted mean time of the logistic approach to equilibrium,
/// int t Z' dt / int Z' dt = N ln(N / z0) / ((N - z0) beta).
inline double characteristic_time(const MeanFieldParams& mf) {
  mf.validate();
  require(mf.z0 < mf.n_eff, ErrorKind::InvalidParameter,
          "characteristic time undefined when z0 = n_eff");
  return mf.n_eff / (mf.n_eff - mf.z0) * std::log(mf.n_eff / mf.z0) / mf.beta;
}

/// Time at which the logistic curve reaches rho * N. Only defined for
/// z0 / N < rho < 1: the curve never reaches N in finite time.
inline double analytic_t_rho(double rho, const MeanFieldParams& mf) {
  mf.validate();
  require(rho < 1.0, ErrorKind::InvalidParameter, "rho >= 1 is never reached in finite time");
  require(rho > mf.z0 / mf.n_eff, ErrorKind::InvalidParameter, "rho already exceeded at t = 0");
  return std::log(rho * (mf.n_eff - mf.z0) / (mf.z0 * (1.0 - rho))) / mf.beta;
}

}  // namespace erepi
