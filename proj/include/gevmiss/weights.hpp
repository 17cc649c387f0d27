#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "gevmiss/gev.hpp"

namespace gevmiss {

/// Whether a block's observed maximum is its true maximum.
enum class Censoring {
  kComplete,  // known: the observed maximum is the true maximum
  kCensored,  // known: the true maximum is missing
  kUnknown,   // block has missing observations, status not observed
};

struct BlockRecord {
  std::optional<double> max;  // observed maximum; absent when n_obs == 0
  int n_obs = 0;
  int n_miss = 0;
  Censoring delta = Censoring::kComplete;

  int size() const { return n_obs + n_miss; }
  bool usable() const { return n_obs > 0 && max.has_value(); }
};

/// Record with the censoring status implied by the counts alone
/// (complete when nothing is missing, unknown otherwise).
BlockRecord make_block(std::optional<double> max, int n_obs, int n_miss);

/// Block maxima paired with censoring weights in [0, 1].
struct WeightedSample {
  Eigen::ArrayXd maxima;
  Eigen::ArrayXd weights;

  Eigen::Index size() const { return maxima.size(); }
};

/// Right-continuous empirical CDF of a pooled set of observed values.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::span<const double> values);

  /// Fraction of pooled values <= x.
  double operator()(double x) const;

  std::size_t size() const { return sorted_.size(); }
  double max() const { return sorted_.back(); }

 private:
  std::vector<double> sorted_;
};

/// n_obs / (n_obs + n_miss).
double weight_unconditional(const BlockRecord& b);

/// F(max)^n_miss with F the pooled empirical CDF.
double weight_conditional_empirical(const BlockRecord& b, const EmpiricalCdf& pool);
double weight_conditional_empirical(const BlockRecord& b, std::span<const double> pool);

/// G(max; theta) for blocks of unknown status; labelled blocks keep 1 or 0.
double weight_em(const BlockRecord& b, const GevParamsd& theta);

/// Weight fixed by a known censoring label, if any.
std::optional<double> label_weight(const BlockRecord& b);

}  // namespace gevmiss
