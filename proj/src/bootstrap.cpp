#include "gevmiss/bootstrap.hpp"

#include <algorithm>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "gevmiss/errors.hpp"
#include "gevmiss/io.hpp"
#include "gevmiss/random.hpp"

namespace gevmiss {

bool operator==(const QuantitySummary& a, const QuantitySummary& b) {
  // NaN-aware so that summaries with undefined se still compare equal to themselves.
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.name == b.name && same(a.estimate, b.estimate) && same(a.se, b.se) && same(a.ci_lo, b.ci_lo) &&
         same(a.ci_hi, b.ci_hi);
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

using Quantities = std::vector<double>;

void validate(const BootOptions& opts) {
  if (opts.B < 100) throw InputError("bootstrap: B must be at least 100");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("bootstrap: alpha must lie in (0, 1)");
  for (double T : opts.periods) {
    if (!(T > 1.0)) throw InputError("bootstrap: return periods must exceed 1");
  }
}

std::vector<std::string> quantity_names(const BootOptions& opts) {
  std::vector<std::string> names{"mu", "sigma", "xi"};
  for (double T : opts.periods) names.push_back("rl_" + format_number(T));
  return names;
}

std::optional<Quantities> quantities_of(const FitResult& r, const BootOptions& opts) {
  if (!r.converged) return std::nullopt;
  Quantities q{r.theta.mu(), r.theta.sigma(), r.theta.xi()};
  for (double T : opts.periods) q.push_back(return_level(r.theta, T));
  if (!std::all_of(q.begin(), q.end(), [](double v) { return std::isfinite(v); })) return std::nullopt;
  return q;
}

std::vector<std::size_t> resample_indices(std::size_t n, std::uint64_t seed, int b) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
  boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

// refit(indices) returns the quantities of one resample, or nullopt on failure.
BootSummary summarize(Method method, const Quantities& point, std::size_t n, const BootOptions& opts,
                      const std::function<std::optional<Quantities>(const std::vector<std::size_t>&)>& refit) {
  const auto names = quantity_names(opts);
  std::vector<std::vector<double>> draws(names.size());
  int failures = 0;
  for (int b = 0; b < opts.B; ++b) {
    std::optional<Quantities> q;
    try {
      q = refit(resample_indices(n, opts.seed, b));
    } catch (const std::exception&) {
      q.reset();
    }
    if (!q) {
      ++failures;
      continue;
    }
    for (std::size_t i = 0; i < names.size(); ++i) draws[i].push_back((*q)[i]);
  }

  BootSummary s;
  s.method = method;
  s.B = opts.B;
  s.failures = failures;
  s.alpha = opts.alpha;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto& v = draws[i];
    std::sort(v.begin(), v.end());
    QuantitySummary qs;
    qs.name = names[i];
    qs.estimate = point[i];
    const auto m = static_cast<double>(v.size());
    if (v.size() >= 2) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      qs.se = std::sqrt(ss / (m - 1.0));
    } else {
      qs.se = std::numeric_limits<double>::quiet_NaN();
    }
    qs.ci_lo = percentile_sorted(v, opts.alpha / 2.0);
    qs.ci_hi = percentile_sorted(v, 1.0 - opts.alpha / 2.0);
    s.quantities.push_back(qs);
  }
  return s;
}

}  // namespace

BootSummary bootstrap_fit(Method method, std::span<const BlockRecord> blocks, const EmpiricalCdf* pool,
                          const BootOptions& opts) {
  validate(opts);
  if (method == Method::kSoftC && pool == nullptr) {
    throw ConfigError("softc requires the pooled series observations");
  }
  std::vector<BlockRecord> usable;
  for (const BlockRecord& b : blocks) {
    if (b.usable()) usable.push_back(b);
  }
  const FitResult base = fit(method, usable, pool, opts.em);
  const auto point = quantities_of(base, opts);
  if (!point) throw OptimizationError("bootstrap: the fit to the original blocks did not converge");

  std::vector<BlockRecord> resample(usable.size());
  return summarize(method, *point, usable.size(), opts, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) resample[i] = usable[idx[i]];
    return quantities_of(fit(method, resample, pool, opts.em), opts);
  });
}

BootSummary bootstrap_maxima(std::span<const double> maxima, const BootOptions& opts) {
  validate(opts);
  auto fit_values = [&](const Eigen::ArrayXd& values) {
    WeightedSample s{values, Eigen::ArrayXd::Ones(values.size())};
    return fit_weighted(s, init_params(std::span<const double>(values.data(), static_cast<std::size_t>(values.size()))));
  };
  const Eigen::ArrayXd original =
      Eigen::Map<const Eigen::ArrayXd>(maxima.data(), static_cast<Eigen::Index>(maxima.size()));
  const auto point = quantities_of(fit_values(original), opts);
  if (!point) throw OptimizationError("bootstrap: the fit to the original maxima did not converge");

  Eigen::ArrayXd resample(original.size());
  return summarize(Method::kObs, *point, maxima.size(), opts, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) resample(static_cast<Eigen::Index>(i)) = maxima[idx[i]];
    return quantities_of(fit_values(resample), opts);
  });
}

void write_boot_csv(std::ostream& os, const BootSummary& s, bool with_header) {
  if (with_header) os << "method,quantity,estimate,se,ci_lo,ci_hi,B,failures\n";
  for (const QuantitySummary& q : s.quantities) {
    os << method_name(s.method) << ',' << q.name << ',' << format_number(q.estimate) << ',' << format_number(q.se)
       << ',' << format_number(q.ci_lo) << ',' << format_number(q.ci_hi) << ',' << s.B << ',' << s.failures << '\n';
  }
}

}  // namespace gevmiss
