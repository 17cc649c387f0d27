#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gevmiss/gev.hpp"
#include "gevmiss/simplex.hpp"
#include "gevmiss/weights.hpp"

namespace gevmiss {

enum class Method { kObs, kHard, kSoftUC, kSoftC, kEm };

inline constexpr Method kAllMethods[] = {Method::kObs, Method::kHard, Method::kSoftUC,
                                         Method::kSoftC, Method::kEm};

std::string_view method_name(Method m);
/// Accepts obs, hard, softuc, softc, em (case-insensitive).
Method parse_method(std::string_view name);

struct FitResult {
  GevParamsd theta{0.0, 1.0, 0.0};
  Method method = Method::kObs;
  bool converged = false;
  int iterations = 1;
  double final_nll = 0.0;
  int dropped_blocks = 0;
  std::optional<Eigen::Vector3d> se;
  // Weighted objective after each outer EM iteration. Not guaranteed monotone.
  std::vector<double> objective_trace;
};

/// Negative weighted censored log-likelihood
///   -sum_j [ w_j log g(m_j) + (1 - w_j) log S(m_j) ].
/// A zero weight suppresses its term entirely, so a fully censored point
/// outside the density support still contributes through the survival term.
double weighted_nll(const GevParamsd& theta, const WeightedSample& sample);

/// Gumbel moment start with xi = 0.1.
GevParamsd init_params(std::span<const double> maxima);

struct FitOptions {
  SimplexOptions simplex{};
  int restarts = 3;
  // Below xi = -1 the density is unbounded at the upper endpoint and the
  // likelihood has no maximum; the optimizer treats it as infeasible.
  double min_shape = -1.0;
};

/// Minimizes weighted_nll over (mu, log sigma, xi) with xi > opts.min_shape.
FitResult fit_weighted(const WeightedSample& sample, const GevParamsd& start,
                       const FitOptions& opts = {});

struct EmOptions {
  double eps = 1e-6;
  int max_iter = 500;
  FitOptions fit{};
};

/// Builds the weighted sample a non-EM method maximizes. Blocks without an
/// observed maximum are skipped; the count is written to *dropped if given.
WeightedSample build_sample(Method method, std::span<const BlockRecord> blocks,
                            const EmpiricalCdf* pool = nullptr, int* dropped = nullptr);

/// Fits one of the five procedures. softC requires the pooled empirical CDF
/// of every observed series value.
FitResult fit(Method method, std::span<const BlockRecord> blocks, const EmpiricalCdf* pool = nullptr,
              const EmOptions& opts = {});

/// EM iteration with E-step weights G(m_j; theta_t) on blocks of unknown status.
FitResult fit_em(std::span<const BlockRecord> blocks, const EmOptions& opts = {});

/// Standard errors from the inverse observed information of the
/// uncensored likelihood, using a central-difference Hessian.
Eigen::Vector3d fisher_se(const GevParamsd& theta, std::span<const double> maxima);

}  // namespace gevmiss
