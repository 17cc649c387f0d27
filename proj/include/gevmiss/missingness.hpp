#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gevmiss/estimators.hpp"
#include "gevmiss/weights.hpp"

namespace gevmiss {

enum class Scenario { kI, kII, kIII };
enum class Dist { kT5, kExp1, kBeta25 };
enum class RampDirection { kDecreasing, kIncreasing };

std::string_view scenario_name(Scenario s);
std::string_view dist_name(Dist d);
Scenario parse_scenario(std::string_view s);
Dist parse_dist(std::string_view s);

/// Missingness mechanism and its rates.
///   I   (MCAR): ceil(pbm k) blocks, each value missing with probability pm.
///   II  (MAR):  value at time t missing with a linear ramp in t of mean apm.
///   III (MNAR): ceil(pbm k) blocks lose their c ~ Binomial(n, pm | c >= 1) largest values.
struct ScenarioConfig {
  Scenario scenario = Scenario::kI;
  int n_blocks = 100;
  int block_size = 100;
  std::optional<double> pbm;
  std::optional<double> pm;
  std::optional<double> apm;
  RampDirection direction = RampDirection::kDecreasing;
  Dist dist = Dist::kExp1;
  std::uint64_t seed = 1;

  /// Throws ConfigError when a required rate is absent or out of [0, 1).
  void validate() const;
};

struct SimSeries {
  std::vector<double> values;
  std::vector<bool> missing;
  std::vector<double> true_block_maxima;
  std::vector<bool> true_delta;
  int block_size = 0;

  /// Every observed value, in series order.
  std::vector<double> observed() const;
};

std::vector<double> gen_series(Dist dist, std::size_t count, std::uint64_t seed);

/// Masks `values` (length n_blocks * block_size) according to cfg, seeded by cfg.seed.
SimSeries apply_missingness(std::vector<double> values, const ScenarioConfig& cfg);

enum class DeltaMode {
  kInferred,  // complete when nothing is missing, unknown otherwise
  kTrue,      // generator's censoring status
};

std::vector<BlockRecord> extract_blocks(const SimSeries& s, int block_size,
                                        DeltaMode mode = DeltaMode::kInferred);

/// Level z with F(z)^block_size = 1 - 1/period for the base distribution F.
double true_return_level(Dist dist, int block_size, double period);

/// Base distribution quantile function.
double base_quantile(Dist dist, double q);

struct StudyOptions {
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  int reps = 1000;
  double period = 50.0;
  bool use_true_delta = false;
  unsigned threads = 0;  // 0: hardware concurrency
  EmOptions em{};
};

struct StudyRow {
  ScenarioConfig config;
  Method method = Method::kObs;
  double mean_rl = 0.0;
  double sd_rl = 0.0;
  int reps = 0;
  int failures = 0;
};

/// One replication: generate, mask, extract, fit every method.
/// Returns the return levels in `methods` order, or nullopt when any fit
/// fails; `failed` (sized like methods) marks which ones.
std::optional<std::vector<double>> run_replication(const ScenarioConfig& cfg, const StudyOptions& opts,
                                                   std::vector<bool>* failed = nullptr);

/// Replicates each grid row until opts.reps replications succeed for every
/// method; rows come out grouped by config, then by method.
std::vector<StudyRow> run_study(std::span<const ScenarioConfig> grid, const StudyOptions& opts);

void write_study_csv(std::ostream& os, std::span<const StudyRow> rows);

/// Monte Carlo comparison of observed, missing and complete block maxima.
struct Theorem1Report {
  double mean_obs = 0, mean_miss = 0, mean_all = 0;
  double var_obs = 0, var_all = 0, second_moment_miss = 0;
  double se_mean_obs = 0, se_mean_miss = 0, se_mean_all = 0;
  double se_var_obs = 0, se_var_all = 0, se_second_moment_miss = 0;
  bool mean_lower = false;  // E(M_n) <= E(M_{n+n'})
  bool mean_upper = false;  // E(M_{n+n'}) <= E(M_n) + E(M_{n'})
  bool var_lower = false;   // V(M_n) - E(M_{n'})(2E(M_n) + E(M_{n'})) <= V(M_{n+n'})
  bool var_upper = false;   // V(M_{n+n'}) <= V(M_n) + E(M_{n'}^2)

  bool passed() const { return mean_lower && mean_upper && var_lower && var_upper; }
};

Theorem1Report theorem1_bounds_check(Dist dist, int n_obs, int n_miss, int trials, std::uint64_t seed);

}  // namespace gevmiss
