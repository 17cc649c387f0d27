#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gevmiss/estimators.hpp"

namespace gevmiss {

struct BootOptions {
  int B = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<double> periods{20.0, 50.0, 100.0};
  EmOptions em{};
};

struct QuantitySummary {
  std::string name;  // mu, sigma, xi, rl_<period>
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Field-wise equality treating NaN as equal to NaN.
bool operator==(const QuantitySummary& a, const QuantitySummary& b);

struct BootSummary {
  Method method = Method::kObs;
  int B = 0;
  int failures = 0;
  double alpha = 0.05;
  std::vector<QuantitySummary> quantities;

  /// More than 10% of the resamples failed to produce a converged fit.
  bool flagged() const { return B - failures < 0.9 * B; }

  friend bool operator==(const BootSummary&, const BootSummary&) = default;
};

/// Nonparametric bootstrap over whole block records, so each maximum keeps
/// its counts and censoring label. softC reuses the original pooled CDF.
/// Estimates are from the fit to the original blocks.
BootSummary bootstrap_fit(Method method, std::span<const BlockRecord> blocks, const EmpiricalCdf* pool,
                          const BootOptions& opts);

/// Plain bootstrap of fully observed maxima with the uncensored likelihood.
/// Draws the same resample indices as bootstrap_fit for equal seeds.
BootSummary bootstrap_maxima(std::span<const double> maxima, const BootOptions& opts);

/// Linear-interpolation percentile of an ascending sample.
double percentile_sorted(std::span<const double> sorted, double p);

void write_boot_csv(std::ostream& os, const BootSummary& s, bool with_header = true);

}  // namespace gevmiss
