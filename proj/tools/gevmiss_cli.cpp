// gevmiss: fit, simulate and detrend from the command line.
//
// Exit codes: 0 success, 2 input or configuration error, 3 numerical
// nonconvergence.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gevmiss/bootstrap.hpp"
#include "gevmiss/errors.hpp"
#include "gevmiss/estimators.hpp"
#include "gevmiss/io.hpp"
#include "gevmiss/missingness.hpp"
#include "gevmiss/surge.hpp"

using namespace gevmiss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNonconvergence = 3;

// Raised for a pipeline stage; the CLI reports the stage name.
struct StageError : std::invalid_argument {
  StageError(const std::string& stage, const std::string& what) : std::invalid_argument(stage + ": " + what) {}
};

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw StageError(name, e.what());
  } catch (const std::domain_error& e) {
    throw StageError(name, e.what());
  }
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + format_number(x);
  return out;
}

std::string join_methods(const std::vector<Method>& v) {
  std::string out;
  for (Method m : v) out += std::string(out.empty() ? "" : ",") + std::string(method_name(m));
  return out;
}

std::vector<Method> resolve_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(kAllMethods), std::end(kAllMethods));
      return out;
    }
    out.push_back(parse_method(n));
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

// Output goes to a file when a path is given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_config(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& cfg) {
  for (const auto& [k, v] : cfg) os << "# " << k << '=' << v << '\n';
}

// ---- fit ----

struct FitArgs {
  std::string blocks_csv;
  std::vector<std::string> methods{"obs"};
  std::string pool_csv;
  std::vector<double> periods{20.0, 50.0, 100.0};
  int boot = 0;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::string out;
};

int run_fit(const FitArgs& a) {
  const std::vector<Method> methods = resolve_methods(a.methods);
  for (double T : a.periods) {
    if (!(T > 1.0)) throw ConfigError("--periods: return periods must exceed 1");
  }
  std::vector<BlockRow> rows;
  {
    auto in = open_input(a.blocks_csv);
    rows = read_blocks_csv(in);
  }
  std::vector<BlockRecord> blocks;
  for (const auto& r : rows) blocks.push_back(r.record);

  std::optional<EmpiricalCdf> pool;
  if (!a.pool_csv.empty()) {
    auto in = open_input(a.pool_csv);
    pool.emplace(read_pool_csv(in));
  }
  for (Method m : methods) {
    if (m == Method::kSoftC && !pool) throw ConfigError("method softc requires --pool-csv");
  }

  std::vector<FitResult> fits;
  for (Method m : methods) fits.push_back(fit(m, blocks, pool ? &*pool : nullptr));

  std::vector<BootSummary> boots;
  if (a.boot > 0) {
    BootOptions bo;
    bo.B = a.boot;
    bo.alpha = a.alpha;
    bo.seed = a.seed;
    bo.periods = a.periods;
    for (Method m : methods) {
      boots.push_back(bootstrap_fit(m, blocks, pool ? &*pool : nullptr, bo));
      if (boots.back().flagged()) {
        std::cerr << "warning: " << method_name(m) << ": " << boots.back().failures << " of " << bo.B
                  << " bootstrap resamples failed\n";
      }
    }
  }

  Output out(a.out);
  std::ostream& os = out.stream();
  write_config(os, {{"command", "fit"},
                    {"blocks_csv", a.blocks_csv},
                    {"methods", join_methods(methods)},
                    {"pool_csv", a.pool_csv},
                    {"periods", join_numbers(a.periods)},
                    {"boot", std::to_string(a.boot)},
                    {"alpha", format_number(a.alpha)},
                    {"seed", std::to_string(a.seed)},
                    {"blocks", std::to_string(blocks.size())}});
  os << "method,mu,sigma,xi";
  for (double T : a.periods) os << ",rl_" << format_number(T);
  os << ",nll,converged,iterations,dropped_blocks\n";
  for (const FitResult& f : fits) {
    os << method_name(f.method) << ',' << format_number(f.theta.mu()) << ',' << format_number(f.theta.sigma()) << ','
       << format_number(f.theta.xi());
    for (double T : a.periods) os << ',' << format_number(return_level(f.theta, T));
    os << ',' << format_number(f.final_nll) << ',' << (f.converged ? 1 : 0) << ',' << f.iterations << ','
       << f.dropped_blocks << '\n';
  }
  // Bootstrap table follows the fit table after a blank line.
  if (!boots.empty()) os << '\n';
  for (std::size_t i = 0; i < boots.size(); ++i) write_boot_csv(os, boots[i], i == 0);

  int code = kExitOk;
  for (const FitResult& f : fits) {
    if (f.converged) continue;
    std::cerr << "nonconvergence: method=" << method_name(f.method) << " best point mu=" << format_number(f.theta.mu())
              << " sigma=" << format_number(f.theta.sigma()) << " xi=" << format_number(f.theta.xi())
              << " nll=" << format_number(f.final_nll) << " iterations=" << f.iterations << '\n';
    code = kExitNonconvergence;
  }
  return code;
}

// ---- simulate ----

struct SimulateArgs {
  std::string grid;
  std::vector<std::string> methods{"all"};
  int reps = 1000;
  double period = 50.0;
  std::uint64_t seed = 1;
  bool use_true_delta = false;
  unsigned threads = 0;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  std::vector<ScenarioConfig> grid;
  {
    auto in = open_input(a.grid);
    grid = read_grid(in, a.seed);
  }
  StudyOptions o;
  o.methods = resolve_methods(a.methods);
  o.reps = a.reps;
  o.period = a.period;
  o.use_true_delta = a.use_true_delta;
  o.threads = a.threads;
  if (a.reps < 1) throw ConfigError("--reps must be at least 1");

  const auto rows = run_study(grid, o);

  Output out(a.out);
  std::ostream& os = out.stream();
  write_config(os, {{"command", "simulate"},
                    {"grid", a.grid},
                    {"methods", join_methods(o.methods)},
                    {"reps", std::to_string(a.reps)},
                    {"period", format_number(a.period)},
                    {"seed", std::to_string(a.seed)},
                    {"use_true_delta", a.use_true_delta ? "1" : "0"}});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ScenarioConfig& c = grid[i];
    os << "# row " << i + 1 << ": scenario=" << scenario_name(c.scenario) << " dist=" << dist_name(c.dist)
       << " n_blocks=" << c.n_blocks << " block_size=" << c.block_size;
    if (c.pbm) os << " pbm=" << format_number(*c.pbm);
    if (c.pm) os << " pm=" << format_number(*c.pm);
    if (c.apm) {
      os << " apm=" << format_number(*c.apm)
         << " direction=" << (c.direction == RampDirection::kDecreasing ? "decreasing" : "increasing");
    }
    os << " seed=" << c.seed << '\n';
  }
  write_study_csv(os, rows);
  return kExitOk;
}

// ---- detrend ----

struct DetrendArgs {
  std::string hourly_csv;
  std::vector<std::string> constituents{"M2", "S2", "N2", "K1", "O1"};
  int window = kHoursPerYear;
  std::string out;
  std::string tidal_out;
  std::string surge_out;
  int year_offset = 0;
  bool include_partial = false;
};

int run_detrend(const DetrendArgs& a) {
  const HourlySeries series = stage("parse", [&] {
    auto in = open_input(a.hourly_csv);
    return parse_hourly_csv(in);
  });
  const TidalModel model = stage("fit_tidal", [&] {
    std::vector<Constituent> cs;
    for (const auto& c : a.constituents) cs.push_back(constituent_from_spec(c));
    return fit_tidal(series, cs, a.window);
  });
  const HourlySeries surge = stage("detrend_surge", [&] { return detrend_surge(series, model); });
  AnnualOptions ao;
  ao.year_offset_hours = a.year_offset;
  ao.include_partial = a.include_partial;
  const auto annual = stage("annual_blocks", [&] { return annual_blocks(surge, ao); });

  std::string constituent_list;
  for (const auto& c : a.constituents) constituent_list += (constituent_list.empty() ? "" : ",") + c;
  const std::vector<std::pair<std::string, std::string>> cfg{{"command", "detrend"},
                                                             {"hourly_csv", a.hourly_csv},
                                                             {"constituents", constituent_list},
                                                             {"window", std::to_string(a.window)},
                                                             {"year_offset", std::to_string(a.year_offset)},
                                                             {"include_partial", a.include_partial ? "1" : "0"},
                                                             {"start", format_timestamp(series.start)},
                                                             {"hours", std::to_string(series.size())}};

  std::vector<BlockRow> rows;
  for (const auto& b : annual) rows.push_back({b.year, b.record});
  {
    Output out(a.out);
    write_config(out.stream(), cfg);
    write_blocks_csv(out.stream(), rows);
  }

  const std::string tidal_path = !a.tidal_out.empty() ? a.tidal_out : (a.out.empty() ? "" : a.out + ".tidal.csv");
  if (!tidal_path.empty()) {
    Output side(tidal_path);
    std::ostream& os = side.stream();
    write_config(os, cfg);
    os << "name,omega,amplitude,phase\n";
    for (const auto& c : model.constituents) {
      os << c.name << ',' << format_number(c.omega) << ',' << format_number(c.amplitude) << ','
         << format_number(c.phase) << '\n';
    }
  }
  if (!a.surge_out.empty()) {
    Output s(a.surge_out);
    write_config(s.stream(), cfg);
    write_hourly_csv(s.stream(), surge, "surge");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GEV block-maxima estimation with missing data"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a GEV to annual block maxima");
  fit_cmd->add_option("blocks_csv", fa.blocks_csv, "Block file: year,max_surge,n_obs,n_miss[,delta]")->required();
  fit_cmd->add_option("--method", fa.methods, "obs|hard|softuc|softc|em|all (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  fit_cmd->add_option("--pool-csv", fa.pool_csv, "Pooled observations for softc (last column)");
  fit_cmd->add_option("--periods", fa.periods, "Return periods")->delimiter(',')->capture_default_str();
  fit_cmd->add_option("--boot", fa.boot, "Bootstrap resamples (0 disables, else >= 100)")->capture_default_str();
  fit_cmd->add_option("--alpha", fa.alpha, "Confidence level complement")->capture_default_str();
  fit_cmd->add_option("--seed", fa.seed, "Bootstrap seed")->capture_default_str();
  fit_cmd->add_option("--out", fa.out, "Output file (default stdout)");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the replication study over a scenario grid");
  sim_cmd->add_option("--grid", sa.grid, "Grid file, one key=value row per scenario")->required();
  sim_cmd->add_option("--methods", sa.methods, "Methods (comma separated, or all)")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--reps", sa.reps, "Successful replications per row")->capture_default_str();
  sim_cmd->add_option("--period", sa.period, "Return period")->capture_default_str();
  sim_cmd->add_option("--seed", sa.seed, "Seed for rows without their own")->capture_default_str();
  sim_cmd->add_flag("--use-true-delta", sa.use_true_delta, "Give fits the generator's censoring status");
  sim_cmd->add_option("--threads", sa.threads, "Worker threads (0 = all cores)")->capture_default_str();
  sim_cmd->add_option("--out", sa.out, "Output file (default stdout)");

  DetrendArgs da;
  auto* det_cmd = app.add_subcommand("detrend", "Hourly levels to annual surge block maxima");
  det_cmd->add_option("hourly_csv", da.hourly_csv, "Hourly file: timestamp,level")->required();
  det_cmd->add_option("--constituents", da.constituents, "Names (M2,S2,N2,K2,K1,O1,P1,Q1,M4) or speeds in deg/h")
      ->delimiter(',')
      ->capture_default_str();
  det_cmd->add_option("--window", da.window, "Mean-level moving average window in hours")->capture_default_str();
  det_cmd->add_option("--out", da.out, "Block file (default stdout)");
  det_cmd->add_option("--tidal-out", da.tidal_out, "Constituent table (default <out>.tidal.csv)");
  det_cmd->add_option("--surge-out", da.surge_out, "Hourly surge series");
  det_cmd->add_option("--year-offset", da.year_offset, "Hours added to each stamp before assigning its year")
      ->capture_default_str();
  det_cmd->add_flag("--include-partial", da.include_partial, "Keep partial first and last years");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return run_fit(fa);
    if (*sim_cmd) return run_simulate(sa);
    return run_detrend(da);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const OptimizationError& e) {
    std::cerr << "nonconvergence: " << e.what() << '\n';
    return kExitNonconvergence;
  } catch (const StudyError& e) {
    std::cerr << "nonconvergence: " << e.what() << '\n';
    return kExitNonconvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
