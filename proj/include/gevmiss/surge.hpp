#pragma once

// Hourly water levels -> deterministic tide -> surge -> annual block maxima.
//
// The tide is modelled as
//   T(t) = M(t) + sum_n A_n cos(pi (omega_n t - psi_n) / 180)
// with t in hours since the start of the fitted grid, omega_n in degrees per
// hour and psi_n in degrees. M(t) is a centered moving average of the
// observed levels; the constituents are fitted by least squares to the
// residual level - M(t).

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gevmiss/weights.hpp"

namespace gevmiss {

inline constexpr int kHoursPerYear = 8760;

/// Hours since 1970-01-01T00:00 of the series' own clock.
using HourStamp = std::int64_t;

/// Accepts YYYY-MM-DD[T| ]HH[:MM[:SS]] with an optional Z or +-HH[:MM]
/// suffix; suffixed stamps are converted to UTC. Minutes and seconds must be
/// zero.
HourStamp parse_timestamp(std::string_view s);
std::string format_timestamp(HourStamp h);

struct HourlySeries {
  std::string station_id;
  HourStamp start = 0;
  std::vector<double> levels;  // NaN marks a missing hour

  std::size_t size() const { return levels.size(); }
  bool missing(std::size_t i) const;
  HourStamp stamp(std::size_t i) const { return start + static_cast<HourStamp>(i); }
};

/// Reads `timestamp,level` rows (extra columns ignored, '#' lines skipped),
/// sorts them and completes the hourly grid with explicit missing hours.
HourlySeries parse_hourly_csv(std::istream& is, std::string station_id = {});
void write_hourly_csv(std::ostream& os, const HourlySeries& s, std::string_view value_column = "level");

struct Constituent {
  std::string name;
  double omega = 0.0;      // degrees per hour
  double amplitude = 0.0;  // metres
  double phase = 0.0;      // degrees in [0, 360)
};

/// M2, S2, N2, K1, O1 with zero amplitude.
std::vector<Constituent> default_constituents();

/// Resolves a name (M2, S2, N2, K2, K1, O1, P1, Q1, M4) or a numeric speed
/// in degrees per hour.
Constituent constituent_from_spec(std::string_view spec);

struct TidalModel {
  HourStamp start = 0;
  std::vector<double> mean_level;  // NaN where the smoothing window has no data
  std::vector<Constituent> constituents;

  std::size_t size() const { return mean_level.size(); }
  /// T(t) at grid index i.
  double tide(std::size_t i) const;
};

TidalModel fit_tidal(const HourlySeries& series, std::vector<Constituent> constituents,
                     int smooth_window_hours = kHoursPerYear);

/// level - T on every observed hour; missing stays missing.
HourlySeries detrend_surge(const HourlySeries& series, const TidalModel& model);

struct AnnualOptions {
  int year_offset_hours = 0;  // added to each stamp before assigning its calendar year
  bool include_partial = false;
};

struct AnnualBlock {
  int year = 0;
  BlockRecord record;
  int block_size = 0;  // hours in the calendar year
  bool partial = false;
};

std::vector<AnnualBlock> annual_blocks(const HourlySeries& series, const AnnualOptions& opts = {});

}  // namespace gevmiss
