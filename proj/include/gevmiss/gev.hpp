#pragma once

// Generalized extreme value distribution: density, distribution and
// survival functions, quantiles, return levels and the log-density gradient.
//
//   G(z) = exp(-t(z)),  t(z) = (1 + xi (z - mu) / sigma)^(-1/xi)   xi != 0
//                       t(z) = exp(-(z - mu) / sigma)              xi == 0
//
// All functions are templated on the scalar type and are pure.

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>

#include "gevmiss/errors.hpp"

namespace gevmiss {

/// Shape magnitude below which the Gumbel (xi = 0) branch is used.
inline constexpr double kGumbelSwitch = 1e-8;

template <typename Scalar>
class GevParams {
 public:
  GevParams(Scalar mu, Scalar sigma, Scalar xi) : mu_(mu), sigma_(sigma), xi_(xi) {
    using std::isfinite;
    if (!isfinite(mu) || !isfinite(sigma) || !isfinite(xi)) {
      throw InputError("GevParams: non-finite parameter");
    }
    if (!(sigma > Scalar(0))) {
      throw InputError("GevParams: scale must be positive, got " + std::to_string(double(sigma)));
    }
  }

  Scalar mu() const { return mu_; }
  Scalar sigma() const { return sigma_; }
  Scalar xi() const { return xi_; }

  bool is_gumbel() const {
    using std::abs;
    return abs(xi_) < Scalar(kGumbelSwitch);
  }

  /// 1 + xi (z - mu) / sigma, the quantity whose positivity defines the support.
  Scalar support_term(Scalar z) const { return Scalar(1) + xi_ * (z - mu_) / sigma_; }

  bool in_support(Scalar z) const { return is_gumbel() || support_term(z) > Scalar(0); }

  /// Lower endpoint (finite only for xi > 0).
  Scalar lower_endpoint() const {
    if (is_gumbel() || xi_ < Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
    return mu_ - sigma_ / xi_;
  }

  /// Upper endpoint (finite only for xi < 0).
  Scalar upper_endpoint() const {
    if (is_gumbel() || xi_ > Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return mu_ - sigma_ / xi_;
  }

  Eigen::Matrix<Scalar, 3, 1> vector() const { return {mu_, sigma_, xi_}; }

  friend bool operator==(const GevParams&, const GevParams&) = default;

 private:
  Scalar mu_;
  Scalar sigma_;
  Scalar xi_;
};

using GevParamsd = GevParams<double>;

namespace detail {

template <typename Scalar>
void require_finite(Scalar z, const char* what) {
  using std::isfinite;
  if (!isfinite(z)) throw InputError(std::string(what) + ": non-finite argument");
}

// log t(z) for z inside the support.
template <typename Scalar>
Scalar log_t(const GevParams<Scalar>& p, Scalar z) {
  using std::log1p;
  const Scalar y = (z - p.mu()) / p.sigma();
  if (p.is_gumbel()) return -y;
  return -log1p(p.xi() * y) / p.xi();
}

}  // namespace detail

/// log g(z); -inf outside the support.
template <typename Scalar>
Scalar log_density(const GevParams<Scalar>& p, Scalar z) {
  using std::exp;
  using std::log;
  using std::log1p;
  detail::require_finite(z, "log_density");
  const Scalar y = (z - p.mu()) / p.sigma();
  if (p.is_gumbel()) return -log(p.sigma()) - y - exp(-y);
  const Scalar s = Scalar(1) + p.xi() * y;
  if (!(s > Scalar(0))) return -std::numeric_limits<Scalar>::infinity();
  const Scalar l1p = log1p(p.xi() * y);
  return -log(p.sigma()) - (Scalar(1) + Scalar(1) / p.xi()) * l1p - exp(-l1p / p.xi());
}

template <typename Scalar>
Scalar density(const GevParams<Scalar>& p, Scalar z) {
  using std::exp;
  return exp(log_density(p, z));
}

template <typename Scalar>
Scalar cdf(const GevParams<Scalar>& p, Scalar z) {
  using std::exp;
  detail::require_finite(z, "cdf");
  if (!p.in_support(z)) return p.xi() > Scalar(0) ? Scalar(0) : Scalar(1);
  return exp(-exp(detail::log_t(p, z)));
}

/// 1 - G(z), via -expm1(-t) so that values near G = 1 keep full precision.
template <typename Scalar>
Scalar survival(const GevParams<Scalar>& p, Scalar z) {
  using std::exp;
  using std::expm1;
  detail::require_finite(z, "survival");
  if (!p.in_support(z)) return p.xi() > Scalar(0) ? Scalar(1) : Scalar(0);
  return -expm1(-exp(detail::log_t(p, z)));
}

template <typename Scalar>
Scalar log_survival(const GevParams<Scalar>& p, Scalar z) {
  using std::log;
  const Scalar s = survival(p, z);
  if (!(s > Scalar(0))) return -std::numeric_limits<Scalar>::infinity();
  return log(s);
}

namespace detail {

// Quantile as a function of -log(q), which callers may compute stably.
template <typename Scalar>
Scalar quantile_from_neglog(const GevParams<Scalar>& p, Scalar neglog_q) {
  using std::expm1;
  using std::log;
  const Scalar l = log(neglog_q);
  if (p.is_gumbel()) return p.mu() - p.sigma() * l;
  return p.mu() + p.sigma() * expm1(-p.xi() * l) / p.xi();
}

}  // namespace detail

template <typename Scalar>
Scalar quantile(const GevParams<Scalar>& p, Scalar q) {
  using std::log;
  if (!(q > Scalar(0) && q < Scalar(1))) throw InputError("quantile: probability must lie in (0, 1)");
  return detail::quantile_from_neglog(p, -log(q));
}

/// Level exceeded by one block maximum with probability 1 / period.
template <typename Scalar>
Scalar return_level(const GevParams<Scalar>& p, Scalar period) {
  using std::isfinite;
  using std::log1p;
  if (!isfinite(period) || !(period > Scalar(1))) {
    throw InputError("return_level: period must exceed 1");
  }
  return detail::quantile_from_neglog(p, -log1p(-Scalar(1) / period));
}

/// Partial derivatives of log g(z) with respect to (mu, sigma, xi).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> log_density_gradient(const GevParams<Scalar>& p, Scalar z) {
  using std::exp;
  using std::log1p;
  detail::require_finite(z, "log_density_gradient");
  const Scalar sigma = p.sigma();
  const Scalar y = (z - p.mu()) / sigma;
  if (p.is_gumbel()) {
    const Scalar e = exp(-y);
    return {(Scalar(1) - e) / sigma, (y - Scalar(1) - y * e) / sigma,
            (Scalar(1) - e) * y * y / Scalar(2) - y};
  }
  const Scalar xi = p.xi();
  const Scalar s = Scalar(1) + xi * y;
  if (!(s > Scalar(0))) throw DomainError("log_density_gradient: point outside the support");
  const Scalar ls = log1p(xi * y);
  const Scalar t = exp(-ls / xi);
  // d log g / d s, chained through ds/dmu = -xi / sigma and ds/dsigma = -xi y / sigma.
  const Scalar core = ((Scalar(1) + xi) / s - t / s) / sigma;
  const Scalar d_xi = (Scalar(1) - t) * (ls / (xi * xi) - y / (xi * s)) - y / s;
  return {core, -Scalar(1) / sigma + y * core, d_xi};
}

}  // namespace gevmiss
