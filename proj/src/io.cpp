#include "gevmiss/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "gevmiss/errors.hpp"
#include "gevmiss/random.hpp"

namespace gevmiss {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::string_view what) {
  const std::string str(trim(s));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (str.empty() || used != str.size() || !std::isfinite(v)) {
    throw InputError(std::string(what) + ": not a finite number: '" + str + "'");
  }
  return v;
}

long long parse_integer(std::string_view s, std::string_view what) {
  const auto t = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw InputError(std::string(what) + ": not an integer: '" + std::string(t) + "'");
  }
  return v;
}

namespace {

bool skip_line(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

std::vector<BlockRow> read_blocks_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    header = split_csv_line(line);
    break;
  }
  const std::vector<std::string> expected{"year", "max_surge", "n_obs", "n_miss"};
  const bool has_delta = header.size() == 5 && header[4] == "delta";
  if (header.size() < 4 || !std::equal(expected.begin(), expected.end(), header.begin()) ||
      (header.size() > 4 && !has_delta)) {
    std::string got;
    for (const auto& h : header) got += (got.empty() ? "" : ",") + h;
    throw InputError("block file header mismatch: expected 'year,max_surge,n_obs,n_miss[,delta]', got '" + got +
                     "'");
  }

  std::vector<BlockRow> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto f = split_csv_line(line);
    const std::string where = "block file line " + std::to_string(line_no);
    if (f.size() != header.size()) {
      throw InputError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                       std::to_string(f.size()));
    }
    BlockRow row;
    row.year = static_cast<int>(parse_integer(f[0], where + " year"));
    std::optional<double> max;
    if (!f[1].empty()) max = parse_real(f[1], where + " max_surge");
    const auto n_obs = parse_integer(f[2], where + " n_obs");
    const auto n_miss = parse_integer(f[3], where + " n_miss");
    if (n_obs < 0 || n_miss < 0) throw InputError(where + ": negative count");
    if (n_obs > 0 && !max) throw InputError(where + ": n_obs > 0 but max_surge is blank");
    row.record = make_block(max, static_cast<int>(n_obs), static_cast<int>(n_miss));
    if (has_delta && !f[4].empty()) {
      if (f[4] == "1") {
        row.record.delta = Censoring::kComplete;
      } else if (f[4] == "0") {
        row.record.delta = Censoring::kCensored;
      } else {
        throw InputError(where + ": delta must be 1, 0 or blank");
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_blocks_csv(std::ostream& os, const std::vector<BlockRow>& rows) {
  os << "year,max_surge,n_obs,n_miss\n";
  for (const BlockRow& r : rows) {
    os << r.year << ',' << (r.record.max ? format_number(*r.record.max) : std::string()) << ',' << r.record.n_obs
       << ',' << r.record.n_miss << '\n';
  }
}

std::vector<double> read_pool_csv(std::istream& is) {
  std::string line;
  bool header_seen = false;
  std::vector<double> out;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.back().empty()) continue;
    out.push_back(parse_real(f.back(), "pool file line " + std::to_string(line_no)));
  }
  if (out.empty()) throw InputError("pool file has no observations");
  return out;
}

std::vector<ScenarioConfig> read_grid(std::istream& is, std::uint64_t default_seed) {
  std::vector<ScenarioConfig> grid;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const std::string where = "grid row " + std::to_string(grid.size() + 1) + " (line " + std::to_string(line_no) + ")";
    ScenarioConfig c;
    bool has_seed = false;
    std::istringstream fields(line);
    std::string kv;
    try {
      while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + kv + "'");
        const std::string key = kv.substr(0, eq);
        const std::string_view value = std::string_view(kv).substr(eq + 1);
        if (key == "scenario") {
          c.scenario = parse_scenario(value);
        } else if (key == "dist") {
          c.dist = parse_dist(value);
        } else if (key == "n_blocks") {
          c.n_blocks = static_cast<int>(parse_integer(value, key));
        } else if (key == "block_size") {
          c.block_size = static_cast<int>(parse_integer(value, key));
        } else if (key == "pbm") {
          c.pbm = parse_real(value, key);
        } else if (key == "pm") {
          c.pm = parse_real(value, key);
        } else if (key == "apm") {
          c.apm = parse_real(value, key);
        } else if (key == "direction") {
          if (value == "decreasing") {
            c.direction = RampDirection::kDecreasing;
          } else if (value == "increasing") {
            c.direction = RampDirection::kIncreasing;
          } else {
            throw ConfigError("direction must be decreasing or increasing");
          }
        } else if (key == "seed") {
          const auto v = parse_integer(value, key);
          if (v < 0) throw ConfigError("seed must be non-negative");
          c.seed = static_cast<std::uint64_t>(v);
          has_seed = true;
        } else {
          throw ConfigError("unknown key '" + key + "'");
        }
      }
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    if (!has_seed) c.seed = derive_seed(default_seed, grid.size());
    grid.push_back(c);
  }
  if (grid.empty()) throw ConfigError("grid file has no rows");
  return grid;
}

}  // namespace gevmiss
