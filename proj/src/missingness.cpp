#include "gevmiss/missingness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "gevmiss/errors.hpp"
#include "gevmiss/io.hpp"
#include "gevmiss/random.hpp"

namespace gevmiss {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kI:
      return "I";
    case Scenario::kII:
      return "II";
    case Scenario::kIII:
      return "III";
  }
  return "?";
}

std::string_view dist_name(Dist d) {
  switch (d) {
    case Dist::kT5:
      return "t5";
    case Dist::kExp1:
      return "exp1";
    case Dist::kBeta25:
      return "beta25";
  }
  return "?";
}

Scenario parse_scenario(std::string_view s) {
  if (s == "I" || s == "1") return Scenario::kI;
  if (s == "II" || s == "2") return Scenario::kII;
  if (s == "III" || s == "3") return Scenario::kIII;
  throw ConfigError("unknown scenario '" + std::string(s) + "' (expected I|II|III)");
}

Dist parse_dist(std::string_view s) {
  for (Dist d : {Dist::kT5, Dist::kExp1, Dist::kBeta25}) {
    if (s == dist_name(d)) return d;
  }
  throw ConfigError("unknown distribution '" + std::string(s) + "' (expected t5|exp1|beta25)");
}

namespace {

void require_rate(const std::optional<double>& rate, const char* name, Scenario s) {
  if (!rate) {
    throw ConfigError(std::string("scenario ") + std::string(scenario_name(s)) + " requires " + name);
  }
  if (!(*rate >= 0.0 && *rate < 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1)");
}

// ceil(rate * k), tolerant of representation error in rate.
int selected_count(double rate, int k) {
  return std::min(k, static_cast<int>(std::ceil(rate * k - 1e-9)));
}

std::vector<int> choose_blocks(int count, int k, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < count; ++i) {
    boost::random::uniform_int_distribution<int> pick(i, k - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_blocks < 1 || block_size < 1) throw ConfigError("n_blocks and block_size must be positive");
  switch (scenario) {
    case Scenario::kI:
    case Scenario::kIII:
      require_rate(pbm, "pbm", scenario);
      require_rate(pm, "pm", scenario);
      break;
    case Scenario::kII:
      require_rate(apm, "apm", scenario);
      break;
  }
}

std::vector<double> SimSeries::observed() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!missing[i]) out.push_back(values[i]);
  }
  return out;
}

std::vector<double> gen_series(Dist dist, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  switch (dist) {
    case Dist::kT5: {
      boost::random::student_t_distribution<double> d(5.0);
      for (double& v : out) v = d(rng);
      break;
    }
    case Dist::kExp1: {
      boost::random::exponential_distribution<double> d(1.0);
      for (double& v : out) v = d(rng);
      break;
    }
    case Dist::kBeta25: {
      boost::random::beta_distribution<double> d(2.0, 5.0);
      for (double& v : out) v = d(rng);
      break;
    }
  }
  return out;
}

SimSeries apply_missingness(std::vector<double> values, const ScenarioConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.block_size);
  const auto k = static_cast<std::size_t>(cfg.n_blocks);
  if (values.size() != n * k) throw InputError("apply_missingness: series length is not n_blocks * block_size");

  SimSeries s;
  s.values = std::move(values);
  s.missing.assign(s.values.size(), false);
  s.block_size = cfg.block_size;
  Rng rng(cfg.seed);

  switch (cfg.scenario) {
    case Scenario::kI: {
      boost::random::bernoulli_distribution<double> miss(*cfg.pm);
      for (int j : choose_blocks(selected_count(*cfg.pbm, cfg.n_blocks), cfg.n_blocks, rng)) {
        for (std::size_t i = 0; i < n; ++i) s.missing[static_cast<std::size_t>(j) * n + i] = miss(rng);
      }
      break;
    }
    case Scenario::kII: {
      const double N = static_cast<double>(s.values.size());
      boost::random::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t t = 0; t < s.values.size(); ++t) {
        // Midpoint ramp so the average over the series is exactly apm.
        const double frac = (static_cast<double>(t) + 0.5) / N;
        const double ramp = cfg.direction == RampDirection::kDecreasing ? 1.0 - frac : frac;
        const double p = std::clamp(2.0 * *cfg.apm * ramp, 0.0, 1.0);
        s.missing[t] = u(rng) < p;
      }
      break;
    }
    case Scenario::kIII: {
      if (*cfg.pm == 0.0) break;  // no block can lose a value
      boost::random::binomial_distribution<int, double> count(cfg.block_size, *cfg.pm);
      std::vector<std::size_t> order(n);
      for (int j : choose_blocks(selected_count(*cfg.pbm, cfg.n_blocks), cfg.n_blocks, rng)) {
        int c = 0;
        while (c == 0) c = count(rng);
        const std::size_t base = static_cast<std::size_t>(j) * n;
        std::iota(order.begin(), order.end(), base);
        std::partial_sort(order.begin(), order.begin() + c, order.end(),
                          [&](std::size_t a, std::size_t b) { return s.values[a] > s.values[b]; });
        for (int i = 0; i < c; ++i) s.missing[order[static_cast<std::size_t>(i)]] = true;
      }
      break;
    }
  }

  s.true_block_maxima.resize(k);
  s.true_delta.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double true_max = -std::numeric_limits<double>::infinity();
    double obs_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = j * n; i < (j + 1) * n; ++i) {
      true_max = std::max(true_max, s.values[i]);
      if (!s.missing[i]) obs_max = std::max(obs_max, s.values[i]);
    }
    s.true_block_maxima[j] = true_max;
    s.true_delta[j] = obs_max == true_max;
  }
  return s;
}

std::vector<BlockRecord> extract_blocks(const SimSeries& s, int block_size, DeltaMode mode) {
  if (block_size < 1 || s.values.size() % static_cast<std::size_t>(block_size) != 0) {
    throw InputError("extract_blocks: series length is not divisible by the block size");
  }
  const auto n = static_cast<std::size_t>(block_size);
  const std::size_t k = s.values.size() / n;
  if (mode == DeltaMode::kTrue && s.true_delta.size() != k) {
    throw InputError("extract_blocks: generator censoring status does not match the block layout");
  }
  std::vector<BlockRecord> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::optional<double> max;
    int n_obs = 0;
    for (std::size_t i = j * n; i < (j + 1) * n; ++i) {
      if (s.missing[i]) continue;
      ++n_obs;
      max = max ? std::max(*max, s.values[i]) : s.values[i];
    }
    BlockRecord b = make_block(max, n_obs, block_size - n_obs);
    if (mode == DeltaMode::kTrue) b.delta = s.true_delta[j] ? Censoring::kComplete : Censoring::kCensored;
    out.push_back(b);
  }
  return out;
}

namespace {

// Quantile of the base distribution at 1 - upper, accurate for small upper.
double base_upper_quantile(Dist dist, double upper) {
  switch (dist) {
    case Dist::kExp1:
      return -std::log(upper);
    case Dist::kT5:
      return boost::math::quantile(boost::math::complement(boost::math::students_t_distribution<>(5.0), upper));
    case Dist::kBeta25:
      return boost::math::quantile(boost::math::complement(boost::math::beta_distribution<>(2.0, 5.0), upper));
  }
  return 0.0;
}

}  // namespace

double base_quantile(Dist dist, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InputError("base_quantile: probability must lie in (0, 1)");
  return base_upper_quantile(dist, 1.0 - q);
}

double true_return_level(Dist dist, int block_size, double period) {
  if (!(period > 1.0)) throw InputError("true_return_level: period must exceed 1");
  if (block_size < 1) throw InputError("true_return_level: block size must be positive");
  // 1 - (1 - 1/period)^(1/n), without cancellation.
  const double upper = -std::expm1(std::log1p(-1.0 / period) / block_size);
  return base_upper_quantile(dist, upper);
}

std::optional<std::vector<double>> run_replication(const ScenarioConfig& cfg, const StudyOptions& opts,
                                                   std::vector<bool>* failed) {
  const std::size_t total = static_cast<std::size_t>(cfg.n_blocks) * static_cast<std::size_t>(cfg.block_size);
  ScenarioConfig mask_cfg = cfg;
  mask_cfg.seed = derive_seed(cfg.seed, 1);
  const SimSeries s = apply_missingness(gen_series(cfg.dist, total, derive_seed(cfg.seed, 0)), mask_cfg);
  const auto blocks =
      extract_blocks(s, cfg.block_size, opts.use_true_delta ? DeltaMode::kTrue : DeltaMode::kInferred);

  std::optional<EmpiricalCdf> pool;
  if (std::find(opts.methods.begin(), opts.methods.end(), Method::kSoftC) != opts.methods.end()) {
    const auto observed = s.observed();
    if (!observed.empty()) pool.emplace(observed);
  }

  std::vector<double> levels(opts.methods.size());
  if (failed) failed->assign(opts.methods.size(), false);
  bool ok = true;
  for (std::size_t m = 0; m < opts.methods.size(); ++m) {
    bool good = false;
    try {
      const FitResult r = fit(opts.methods[m], blocks, pool ? &*pool : nullptr, opts.em);
      if (r.converged) {
        levels[m] = return_level(r.theta, opts.period);
        good = std::isfinite(levels[m]);
      }
    } catch (const std::exception&) {
      good = false;
    }
    if (!good) {
      ok = false;
      if (failed) (*failed)[m] = true;
    }
  }
  if (!ok) return std::nullopt;
  return levels;
}

namespace {

struct Attempt {
  std::optional<std::vector<double>> levels;
  std::vector<bool> failed;
};

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

}  // namespace

std::vector<StudyRow> run_study(std::span<const ScenarioConfig> grid, const StudyOptions& opts) {
  if (opts.reps < 1) throw InputError("run_study: reps must be at least 1");
  if (opts.methods.empty()) throw InputError("run_study: no methods requested");
  if (!(opts.period > 1.0)) throw InputError("run_study: period must exceed 1");
  const unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_methods = opts.methods.size();
  const auto reps = static_cast<std::size_t>(opts.reps);
  const std::size_t max_failures = 50 * reps;

  std::vector<StudyRow> rows;
  for (const ScenarioConfig& cfg : grid) {
    cfg.validate();
    std::vector<std::vector<double>> levels(n_methods);
    std::vector<int> failures(n_methods, 0);
    std::size_t successes = 0;
    std::size_t failed_attempts = 0;
    std::uint64_t next_attempt = 0;

    while (successes < reps) {
      // Batch sized to the outstanding replications; results are consumed in
      // attempt order so the outcome does not depend on scheduling.
      const std::size_t batch = reps - successes;
      std::vector<Attempt> attempts(batch);
      parallel_for(batch, threads, [&](std::size_t i) {
        ScenarioConfig rep = cfg;
        rep.seed = derive_seed(cfg.seed, next_attempt + i);
        attempts[i].levels = run_replication(rep, opts, &attempts[i].failed);
      });
      next_attempt += batch;
      for (const Attempt& a : attempts) {
        if (a.levels) {
          for (std::size_t m = 0; m < n_methods; ++m) levels[m].push_back((*a.levels)[m]);
          ++successes;
        } else {
          ++failed_attempts;
          for (std::size_t m = 0; m < n_methods; ++m) failures[m] += a.failed[m] ? 1 : 0;
        }
      }
      if (failed_attempts > max_failures) {
        throw StudyError("run_study: too many failed replications for scenario " +
                         std::string(scenario_name(cfg.scenario)) + ", dist " + std::string(dist_name(cfg.dist)) +
                         ", n_blocks " + std::to_string(cfg.n_blocks) + ", seed " + std::to_string(cfg.seed));
      }
    }

    for (std::size_t m = 0; m < n_methods; ++m) {
      const auto& v = levels[m];
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      StudyRow row;
      row.config = cfg;
      row.method = opts.methods[m];
      row.mean_rl = mean;
      row.sd_rl = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      row.reps = static_cast<int>(v.size());
      row.failures = failures[m];
      rows.push_back(row);
    }
  }
  return rows;
}

void write_study_csv(std::ostream& os, std::span<const StudyRow> rows) {
  os << "scenario,dist,n_blocks,block_size,pbm,pm,apm,method,mean_rl,sd_rl,reps,failures\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const StudyRow& r : rows) {
    const ScenarioConfig& c = r.config;
    const bool blocks_rates = c.scenario != Scenario::kII;
    os << scenario_name(c.scenario) << ',' << dist_name(c.dist) << ',' << c.n_blocks << ',' << c.block_size << ','
       << (blocks_rates ? opt(c.pbm) : "") << ',' << (blocks_rates ? opt(c.pm) : "") << ','
       << (blocks_rates ? "" : opt(c.apm)) << ',' << method_name(r.method) << ',' << format_number(r.mean_rl)
       << ',' << format_number(r.sd_rl) << ',' << r.reps << ',' << r.failures << '\n';
  }
}

Theorem1Report theorem1_bounds_check(Dist dist, int n_obs, int n_miss, int trials, std::uint64_t seed) {
  if (dist == Dist::kT5) throw DomainError("theorem1_bounds_check: requires a non-negative distribution");
  if (trials < 10000) throw InputError("theorem1_bounds_check: need at least 10^4 trials");
  if (n_obs < 1 || n_miss < 0) throw InputError("theorem1_bounds_check: invalid block sizes");

  const auto T = static_cast<std::size_t>(trials);
  std::vector<double> m_obs(T), m_miss(T), m_all(T);
  Rng rng(seed);
  for (std::size_t r = 0; r < T; ++r) {
    const auto draws = gen_series(dist, static_cast<std::size_t>(n_obs + n_miss), rng());
    m_obs[r] = *std::max_element(draws.begin(), draws.begin() + n_obs);
    // Maximum of an empty set of non-negative variables taken as 0.
    m_miss[r] = n_miss > 0 ? *std::max_element(draws.begin() + n_obs, draws.end()) : 0.0;
    m_all[r] = std::max(m_obs[r], m_miss[r]);
  }

  struct Moments {
    double mean, var, se_mean, se_var;
  };
  auto moments = [T](const std::vector<double>& v) {
    const double n = static_cast<double>(T);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
      const double d2 = (x - mean) * (x - mean);
      m2 += d2;
      m4 += d2 * d2;
    }
    const double var = m2 / (n - 1.0);
    m4 /= n;
    return Moments{mean, var, std::sqrt(var / n), std::sqrt(std::max(0.0, m4 - var * var) / n)};
  };
  std::vector<double> miss_sq(T);
  std::transform(m_miss.begin(), m_miss.end(), miss_sq.begin(), [](double x) { return x * x; });

  const Moments o = moments(m_obs), u = moments(m_miss), a = moments(m_all), u2 = moments(miss_sq);
  Theorem1Report rep;
  rep.mean_obs = o.mean;
  rep.mean_miss = u.mean;
  rep.mean_all = a.mean;
  rep.var_obs = o.var;
  rep.var_all = a.var;
  rep.second_moment_miss = u2.mean;
  rep.se_mean_obs = o.se_mean;
  rep.se_mean_miss = u.se_mean;
  rep.se_mean_all = a.se_mean;
  rep.se_var_obs = o.se_var;
  rep.se_var_all = a.se_var;
  rep.se_second_moment_miss = u2.se_mean;

  rep.mean_lower = o.mean <= a.mean + 3.0 * (o.se_mean + a.se_mean);
  rep.mean_upper = a.mean <= o.mean + u.mean + 3.0 * (a.se_mean + o.se_mean + u.se_mean);
  const double var_lower_bound = o.var - u.mean * (2.0 * o.mean + u.mean);
  const double var_lower_se = o.se_var + 2.0 * u.mean * o.se_mean + 2.0 * (o.mean + u.mean) * u.se_mean;
  rep.var_lower = var_lower_bound <= a.var + 3.0 * (var_lower_se + a.se_var);
  rep.var_upper = a.var <= o.var + u2.mean + 3.0 * (a.se_var + o.se_var + u2.se_mean);
  return rep;
}

}  // namespace gevmiss
