#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gevmiss/missingness.hpp"
#include "gevmiss/weights.hpp"

namespace gevmiss {

/// Six significant digits, "%.6g" style; the single numeric format used in
/// every emitted file.
std::string format_number(double v);

std::vector<std::string> split_csv_line(std::string_view line);
std::string_view trim(std::string_view s);

/// Parses a full-field real; throws InputError naming `what` otherwise.
double parse_real(std::string_view s, std::string_view what);
long long parse_integer(std::string_view s, std::string_view what);

/// One row of the annual block file `year,max_surge,n_obs,n_miss[,delta]`.
struct BlockRow {
  int year = 0;
  BlockRecord record;
};

/// Reads a block file. Lines starting with '#' are skipped. A blank
/// max_surge means no observed maximum. The optional delta column takes
/// 1 (complete), 0 (censored) or blank (inferred from n_miss).
std::vector<BlockRow> read_blocks_csv(std::istream& is);
void write_blocks_csv(std::ostream& os, const std::vector<BlockRow>& rows);

/// Reads pooled observations from the last column of a CSV with a header;
/// blank fields are skipped.
std::vector<double> read_pool_csv(std::istream& is);

/// Scenario grid: one row per line of whitespace-separated key=value pairs
/// with keys scenario, dist, n_blocks, block_size, pbm, pm, apm, direction
/// and seed. Rows without a seed get derive_seed(default_seed, row index).
/// Errors name the offending row.
std::vector<ScenarioConfig> read_grid(std::istream& is, std::uint64_t default_seed);

}  // namespace gevmiss
