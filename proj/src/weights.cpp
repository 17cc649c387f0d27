#include "gevmiss/weights.hpp"

#include <algorithm>
#include <cmath>

#include "gevmiss/errors.hpp"

namespace gevmiss {

BlockRecord make_block(std::optional<double> max, int n_obs, int n_miss) {
  if (n_obs < 0 || n_miss < 0) throw InputError("make_block: negative count");
  if (n_obs == 0) max.reset();
  return {max, n_obs, n_miss, n_miss == 0 ? Censoring::kComplete : Censoring::kUnknown};
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
  if (sorted_.empty()) throw DomainError("EmpiricalCdf: empty observation pool");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto below = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
  return static_cast<double>(below) / static_cast<double>(sorted_.size());
}

std::optional<double> label_weight(const BlockRecord& b) {
  switch (b.delta) {
    case Censoring::kComplete:
      return 1.0;
    case Censoring::kCensored:
      return 0.0;
    case Censoring::kUnknown:
      break;
  }
  if (b.n_miss == 0) return 1.0;
  return std::nullopt;
}

double weight_unconditional(const BlockRecord& b) {
  if (b.size() <= 0) throw DomainError("weight_unconditional: empty block");
  return static_cast<double>(b.n_obs) / static_cast<double>(b.size());
}

double weight_conditional_empirical(const BlockRecord& b, const EmpiricalCdf& pool) {
  if (!b.max) throw DomainError("weight_conditional_empirical: block has no observed maximum");
  if (b.n_miss == 0) return 1.0;
  return std::pow(pool(*b.max), b.n_miss);
}

double weight_conditional_empirical(const BlockRecord& b, std::span<const double> pool) {
  return weight_conditional_empirical(b, EmpiricalCdf(pool));
}

double weight_em(const BlockRecord& b, const GevParamsd& theta) {
  if (auto w = label_weight(b)) return *w;
  if (!b.max) throw DomainError("weight_em: block has no observed maximum");
  return cdf(theta, *b.max);
}

}  // namespace gevmiss
