#include "gevmiss/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "gevmiss/errors.hpp"

namespace gevmiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log g(z) and log S(z) from a single evaluation of the support term.
// Only the halves actually needed are computed.
struct LogTerms {
  double log_g = -kInf;
  double log_s = -kInf;
};

LogTerms log_terms(const GevParamsd& p, double z, bool want_g, bool want_s) {
  LogTerms out;
  const double log_sigma = std::log(p.sigma());
  const double y = (z - p.mu()) / p.sigma();
  double t = 0.0;
  if (p.is_gumbel()) {
    t = std::exp(-y);
    if (want_g) out.log_g = -log_sigma - y - t;
  } else {
    const double s = 1.0 + p.xi() * y;
    if (!(s > 0.0)) {
      out.log_s = p.xi() > 0.0 ? 0.0 : -kInf;
      return out;
    }
    const double ls = std::log1p(p.xi() * y);
    t = std::exp(-ls / p.xi());
    if (want_g) out.log_g = -log_sigma - (1.0 + 1.0 / p.xi()) * ls - t;
  }
  if (want_s) {
    const double surv = -std::expm1(-t);
    out.log_s = surv > 0.0 ? std::log(surv) : -kInf;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Eigen::Vector3d to_free(const GevParamsd& p) { return {p.mu(), std::log(p.sigma()), p.xi()}; }

std::optional<GevParamsd> from_free(const Eigen::Vector3d& v) {
  const double sigma = std::exp(v(1));
  if (!std::isfinite(v(0)) || !std::isfinite(v(2)) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    return std::nullopt;
  }
  return GevParamsd(v(0), sigma, v(2));
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kObs:
      return "obs";
    case Method::kHard:
      return "hard";
    case Method::kSoftUC:
      return "softuc";
    case Method::kSoftC:
      return "softc";
    case Method::kEm:
      return "em";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  const std::string n = lower(name);
  for (Method m : kAllMethods) {
    if (n == method_name(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "' (expected obs|hard|softuc|softc|em)");
}

double weighted_nll(const GevParamsd& theta, const WeightedSample& sample) {
  if (sample.size() == 0) throw InputError("weighted_nll: empty sample");
  double ll = 0.0;
  for (Eigen::Index j = 0; j < sample.size(); ++j) {
    const double w = sample.weights(j);
    const LogTerms lt = log_terms(theta, sample.maxima(j), w > 0.0, w < 1.0);
    if (w > 0.0) {
      if (lt.log_g == -kInf) return kInf;
      ll += w * lt.log_g;
    }
    if (w < 1.0) {
      if (lt.log_s == -kInf) return kInf;
      ll += (1.0 - w) * lt.log_s;
    }
  }
  return -ll;
}

GevParamsd init_params(std::span<const double> maxima) {
  if (std::set<double>(maxima.begin(), maxima.end()).size() < 3) {
    throw InputError("init_params: need at least 3 distinct maxima");
  }
  const auto k = static_cast<double>(maxima.size());
  double mean = 0.0;
  for (double m : maxima) mean += m;
  mean /= k;
  double ss = 0.0;
  for (double m : maxima) ss += (m - mean) * (m - mean);
  const double sigma0 = std::sqrt(ss / (k - 1.0)) * std::sqrt(6.0) / std::numbers::pi;
  return {mean - std::numbers::egamma * sigma0, sigma0, 0.1};
}

FitResult fit_weighted(const WeightedSample& sample, const GevParamsd& start, const FitOptions& opts) {
  if (sample.size() == 0) throw InputError("fit_weighted: empty sample");
  auto objective = [&](const Eigen::Vector3d& v) {
    const auto p = from_free(v);
    return p && v(2) > opts.min_shape ? weighted_nll(*p, sample) : kInf;
  };

  Eigen::Vector3d x0 = to_free(start);
  if (!std::isfinite(objective(x0))) {
    Eigen::Vector3d gumbel = x0;
    gumbel(2) = 0.0;
    if (std::isfinite(objective(gumbel))) x0 = gumbel;
  }
  const Eigen::Vector3d steps(0.2 * start.sigma(), 0.2, 0.1);

  auto best = nelder_mead<double, 3>(objective, x0, steps, opts.simplex);
  // Restart from the best point with a fresh simplex; a collapsed simplex
  // shows up as a significant improvement on restart.
  for (int r = 0; r < opts.restarts; ++r) {
    const Eigen::Vector3d restart_steps = best.converged ? Eigen::Vector3d(0.1 * steps) : steps;
    auto again = nelder_mead<double, 3>(objective, best.x, restart_steps, opts.simplex);
    const double tol = opts.simplex.rel_tol * std::max(1.0, std::abs(best.f));
    const bool improved = again.f < best.f - tol;
    if (again.f <= best.f) {
      best = again;
    } else {
      best.converged = best.converged && again.converged;
    }
    if (best.converged && !improved) break;
  }
  if (!std::isfinite(best.f)) {
    throw OptimizationError("fit_weighted: objective is infinite everywhere explored");
  }

  FitResult out;
  out.theta = *from_free(best.x);
  out.converged = best.converged;
  out.final_nll = best.f;
  out.iterations = 1;
  return out;
}

WeightedSample build_sample(Method method, std::span<const BlockRecord> blocks, const EmpiricalCdf* pool,
                            int* dropped) {
  if (method == Method::kSoftC && pool == nullptr) {
    throw ConfigError("softc requires the pooled series observations");
  }
  std::vector<double> maxima;
  std::vector<double> weights;
  int n_dropped = 0;
  for (const BlockRecord& b : blocks) {
    if (!b.usable()) {
      ++n_dropped;
      continue;
    }
    double w = 1.0;
    if (method != Method::kObs && method != Method::kEm) {
      if (auto label = label_weight(b)) {
        w = *label;
      } else if (method == Method::kHard) {
        w = 0.0;
      } else if (method == Method::kSoftUC) {
        w = weight_unconditional(b);
      } else {
        w = weight_conditional_empirical(b, *pool);
      }
    }
    maxima.push_back(*b.max);
    weights.push_back(w);
  }
  if (dropped) *dropped = n_dropped;
  WeightedSample s;
  s.maxima = Eigen::Map<const Eigen::ArrayXd>(maxima.data(), static_cast<Eigen::Index>(maxima.size()));
  s.weights = Eigen::Map<const Eigen::ArrayXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return s;
}

namespace {

GevParamsd start_for(const WeightedSample& s) {
  return init_params(std::span<const double>(s.maxima.data(), static_cast<std::size_t>(s.size())));
}

void require_usable(const WeightedSample& s) {
  if (s.size() < 3) {
    throw InputError("need at least 3 blocks with an observed maximum, got " + std::to_string(s.size()));
  }
}

}  // namespace

FitResult fit(Method method, std::span<const BlockRecord> blocks, const EmpiricalCdf* pool,
              const EmOptions& opts) {
  if (method == Method::kEm) return fit_em(blocks, opts);
  int dropped = 0;
  const WeightedSample sample = build_sample(method, blocks, pool, &dropped);
  require_usable(sample);
  FitResult r = fit_weighted(sample, start_for(sample), opts.fit);
  r.method = method;
  r.dropped_blocks = dropped;
  return r;
}

FitResult fit_em(std::span<const BlockRecord> blocks, const EmOptions& opts) {
  if (!(opts.eps > 0.0)) throw InputError("fit_em: eps must be positive");
  int dropped = 0;
  WeightedSample sample = build_sample(Method::kObs, blocks, nullptr, &dropped);
  require_usable(sample);

  std::vector<const BlockRecord*> usable;
  for (const BlockRecord& b : blocks) {
    if (b.usable()) usable.push_back(&b);
  }

  FitResult current = fit_weighted(sample, start_for(sample), opts.fit);
  FitResult out;
  out.method = Method::kEm;
  out.dropped_blocks = dropped;
  out.converged = false;

  for (int t = 1; t <= opts.max_iter; ++t) {
    for (std::size_t j = 0; j < usable.size(); ++j) {
      sample.weights(static_cast<Eigen::Index>(j)) = weight_em(*usable[j], current.theta);
    }
    FitResult next;
    try {
      next = fit_weighted(sample, current.theta, opts.fit);
    } catch (const OptimizationError& e) {
      throw OptimizationError("EM M-step failed at iteration " + std::to_string(t) + ": " + e.what());
    }
    out.objective_trace.push_back(next.final_nll);
    const double change = (next.theta.vector() - current.theta.vector()).cwiseAbs().maxCoeff();
    current = next;
    out.iterations = t;
    if (!next.converged) break;
    if (change < opts.eps) {
      out.converged = true;
      break;
    }
  }
  out.theta = current.theta;
  out.final_nll = current.final_nll;
  return out;
}

Eigen::Vector3d fisher_se(const GevParamsd& theta, std::span<const double> maxima) {
  if (maxima.empty()) throw InputError("fisher_se: no maxima");
  auto nll = [&](const Eigen::Vector3d& v) {
    if (!(v(1) > 0.0)) return kInf;
    const GevParamsd p(v(0), v(1), v(2));
    double s = 0.0;
    for (double m : maxima) s -= log_density(p, m);
    return s;
  };
  const Eigen::Vector3d x = theta.vector();
  const Eigen::Vector3d h(1e-4 * std::max(std::abs(theta.mu()), theta.sigma()), 1e-4 * theta.sigma(),
                          1e-4 * std::max(std::abs(theta.xi()), 1.0));
  const double f0 = nll(x);
  if (!std::isfinite(f0)) throw DiagnosticsError("fisher_se: maxima outside the fitted support");

  Eigen::Matrix3d H;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d ei = h(i) * Eigen::Vector3d::Unit(i);
    H(i, i) = (nll(x + ei) - 2.0 * f0 + nll(x - ei)) / (h(i) * h(i));
    for (int j = 0; j < i; ++j) {
      const Eigen::Vector3d ej = h(j) * Eigen::Vector3d::Unit(j);
      H(i, j) = (nll(x + ei + ej) - nll(x + ei - ej) - nll(x - ei + ej) + nll(x - ei - ej)) /
                (4.0 * h(i) * h(j));
      H(j, i) = H(i, j);
    }
  }
  if (!H.allFinite()) {
    throw DiagnosticsError("fisher_se: information matrix is not finite; use the bootstrap instead");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(H);
  const Eigen::Vector3d ev = eig.eigenvalues();
  if (!(ev(0) > 1e-10 * std::abs(ev(2)))) {
    throw DiagnosticsError(
        "fisher_se: observed information is not positive definite; use the bootstrap instead");
  }
  const Eigen::Matrix3d cov = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return cov.diagonal().cwiseSqrt();
}

}  // namespace gevmiss
