#include "gevmiss/surge.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "gevmiss/errors.hpp"
#include "gevmiss/io.hpp"

namespace gevmiss {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

HourStamp floor_div(HourStamp a, HourStamp b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

int digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole) {
  if (pos + n > s.size()) throw InputError("bad timestamp '" + std::string(whole) + "'");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw InputError("bad timestamp '" + std::string(whole) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

HourStamp parse_timestamp(std::string_view raw) {
  const std::string_view s = trim(raw);
  // YYYY-MM-DD
  const int year = digits(s, 0, 4, raw);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') throw InputError("bad timestamp '" + std::string(raw) + "'");
  const int month = digits(s, 5, 2, raw);
  const int day = digits(s, 8, 2, raw);
  std::size_t pos = 10;
  int hour = 0, minute = 0, second = 0;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    hour = digits(s, pos + 1, 2, raw);
    pos += 3;
    if (pos < s.size() && s[pos] == ':') {
      minute = digits(s, pos + 1, 2, raw);
      pos += 3;
      if (pos < s.size() && s[pos] == ':') {
        second = digits(s, pos + 1, 2, raw);
        pos += 3;
      }
    }
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '+' ? 1 : -1;
      const int oh = digits(s, pos + 1, 2, raw);
      int om = 0;
      pos += 3;
      if (pos < s.size()) {
        if (s[pos] == ':') ++pos;
        om = digits(s, pos, 2, raw);
        pos += 2;
      }
      offset_minutes = sign * (oh * 60 + om);
    }
    if (pos != s.size()) throw InputError("bad timestamp '" + std::string(raw) + "'");
  }

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 59) {
    throw InputError("bad timestamp '" + std::string(raw) + "'");
  }
  if (minute != 0 || second != 0 || offset_minutes % 60 != 0) {
    throw InputError("non-hourly cadence: timestamp '" + std::string(raw) + "' is not on the hour");
  }
  const HourStamp days = sys_days{ymd}.time_since_epoch().count();
  return days * 24 + hour - offset_minutes / 60;
}

std::string format_timestamp(HourStamp h) {
  using namespace std::chrono;
  const HourStamp days = floor_div(h, 24);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(h - days * 24));
  return buf;
}

bool HourlySeries::missing(std::size_t i) const { return std::isnan(levels[i]); }

HourlySeries parse_hourly_csv(std::istream& is, std::string station_id) {
  std::string line;
  std::vector<std::string> header;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  const auto ts_col = std::find(header.begin(), header.end(), "timestamp") - header.begin();
  const auto lv_col = std::find(header.begin(), header.end(), "level") - header.begin();
  if (ts_col == static_cast<std::ptrdiff_t>(header.size()) || lv_col == static_cast<std::ptrdiff_t>(header.size())) {
    throw InputError("hourly file must have 'timestamp' and 'level' columns");
  }

  std::vector<std::pair<HourStamp, double>> rows;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max(ts_col, lv_col)) + 1;
    if (f.size() < need) throw InputError("hourly file line " + std::to_string(line_no) + ": too few columns");
    const HourStamp h = parse_timestamp(f[static_cast<std::size_t>(ts_col)]);
    const auto& lv = f[static_cast<std::size_t>(lv_col)];
    rows.emplace_back(h, lv.empty() ? kNaN : parse_real(lv, "hourly file line " + std::to_string(line_no)));
  }
  if (rows.empty()) throw InputError("hourly file has no rows");

  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string dups;
  int n_dups = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      if (n_dups++ < 10) dups += (dups.empty() ? "" : ", ") + format_timestamp(rows[i].first);
    }
  }
  if (n_dups > 0) {
    throw InputError("duplicate timestamps (" + std::to_string(n_dups) + "): " + dups + (n_dups > 10 ? ", ..." : ""));
  }

  HourlySeries s;
  s.station_id = std::move(station_id);
  s.start = rows.front().first;
  s.levels.assign(static_cast<std::size_t>(rows.back().first - s.start + 1), kNaN);
  for (const auto& [h, v] : rows) s.levels[static_cast<std::size_t>(h - s.start)] = v;
  return s;
}

void write_hourly_csv(std::ostream& os, const HourlySeries& s, std::string_view value_column) {
  os << "timestamp," << value_column << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << format_timestamp(s.stamp(i)) << ',' << (s.missing(i) ? std::string() : format_number(s.levels[i])) << '\n';
  }
}

std::vector<Constituent> default_constituents() {
  return {constituent_from_spec("M2"), constituent_from_spec("S2"), constituent_from_spec("N2"),
          constituent_from_spec("K1"), constituent_from_spec("O1")};
}

Constituent constituent_from_spec(std::string_view spec) {
  // Angular speeds in degrees per mean solar hour.
  static const std::map<std::string, double, std::less<>> kSpeeds{
      {"M2", 28.9841042}, {"S2", 30.0},       {"N2", 28.4397295}, {"K2", 30.0821373}, {"K1", 15.0410686},
      {"O1", 13.9430356}, {"P1", 14.9589314}, {"Q1", 13.3986609}, {"M4", 57.9682084}};
  const auto name = trim(spec);
  if (auto it = kSpeeds.find(name); it != kSpeeds.end()) return {it->first, it->second, 0.0, 0.0};
  const double omega = parse_real(name, "constituent speed");
  if (!(omega > 0.0)) throw InputError("constituent speed must be positive");
  return {std::string(name), omega, 0.0, 0.0};
}

double TidalModel::tide(std::size_t i) const {
  double v = mean_level[i];
  const double t = static_cast<double>(i);
  for (const Constituent& c : constituents) {
    v += c.amplitude * std::cos(degrees_to_radians(std::fmod(c.omega * t, 360.0) - c.phase));
  }
  return v;
}

TidalModel fit_tidal(const HourlySeries& series, std::vector<Constituent> constituents, int smooth_window_hours) {
  if (series.size() < static_cast<std::size_t>(kHoursPerYear)) {
    throw InputError("fit_tidal: need at least one year of hourly data");
  }
  if (constituents.empty()) throw InputError("fit_tidal: no constituents");
  if (smooth_window_hours < 1) throw InputError("fit_tidal: smoothing window must be positive");
  for (std::size_t a = 0; a < constituents.size(); ++a) {
    if (!(constituents[a].omega > 0.0)) throw InputError("fit_tidal: constituent speed must be positive");
    for (std::size_t b = 0; b < a; ++b) {
      if (std::abs(constituents[a].omega - constituents[b].omega) < 1e-9) {
        throw InputError("fit_tidal: rank-deficient regression, duplicate constituent speed " +
                         format_number(constituents[a].omega));
      }
    }
  }

  const std::size_t n = series.size();
  TidalModel model;
  model.start = series.start;

  // Centered moving average over observed hours via prefix sums.
  std::vector<double> sum(n + 1, 0.0);
  std::vector<std::size_t> count(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool obs = !series.missing(i);
    sum[i + 1] = sum[i] + (obs ? series.levels[i] : 0.0);
    count[i + 1] = count[i] + (obs ? 1 : 0);
  }
  const auto half_before = static_cast<std::size_t>(smooth_window_hours / 2);
  const auto half_after = static_cast<std::size_t>(smooth_window_hours - 1) - half_before;
  model.mean_level.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_before ? i - half_before : 0;
    const std::size_t hi = std::min(n, i + half_after + 1);
    const std::size_t c = count[hi] - count[lo];
    model.mean_level[i] = c > 0 ? (sum[hi] - sum[lo]) / static_cast<double>(c) : kNaN;
  }

  const auto p = static_cast<Eigen::Index>(2 * constituents.size());
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd row(p);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (series.missing(i) || std::isnan(model.mean_level[i])) continue;
    const double t = static_cast<double>(i);
    for (std::size_t k = 0; k < constituents.size(); ++k) {
      const double arg = degrees_to_radians(std::fmod(constituents[k].omega * t, 360.0));
      row(static_cast<Eigen::Index>(2 * k)) = std::cos(arg);
      row(static_cast<Eigen::Index>(2 * k + 1)) = std::sin(arg);
    }
    normal.selfadjointView<Eigen::Lower>().rankUpdate(row);
    rhs += row * (series.levels[i] - model.mean_level[i]);
    ++used;
  }
  normal = normal.selfadjointView<Eigen::Lower>();
  if (used <= static_cast<std::size_t>(p)) throw InputError("fit_tidal: too few observed hours");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(normal);
  if (qr.rank() < p) throw InputError("fit_tidal: rank-deficient harmonic regression");
  const Eigen::VectorXd coef = qr.solve(rhs);

  for (std::size_t k = 0; k < constituents.size(); ++k) {
    const double a = coef(static_cast<Eigen::Index>(2 * k));
    const double b = coef(static_cast<Eigen::Index>(2 * k + 1));
    constituents[k].amplitude = std::hypot(a, b);
    double phase = std::atan2(b, a) * 180.0 / std::numbers::pi;
    if (phase < 0.0) phase += 360.0;
    if (phase >= 360.0) phase -= 360.0;
    constituents[k].phase = phase;
  }
  model.constituents = std::move(constituents);
  return model;
}

HourlySeries detrend_surge(const HourlySeries& series, const TidalModel& model) {
  if (series.start < model.start ||
      series.start + static_cast<HourStamp>(series.size()) > model.start + static_cast<HourStamp>(model.size())) {
    throw InputError("detrend_surge: series extends beyond the fitted tidal grid");
  }
  const auto offset = static_cast<std::size_t>(series.start - model.start);
  HourlySeries out = series;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.missing(i)) continue;
    out.levels[i] = series.levels[i] - model.tide(i + offset);
  }
  return out;
}

std::vector<AnnualBlock> annual_blocks(const HourlySeries& series, const AnnualOptions& opts) {
  using namespace std::chrono;
  auto year_of = [](HourStamp h) { return static_cast<int>(year_month_day{sys_days{days{floor_div(h, 24)}}}.year()); };
  auto year_start = [](int y) {
    return static_cast<HourStamp>(sys_days{std::chrono::year{y} / January / 1}.time_since_epoch().count()) * 24;
  };
  if (series.size() == 0) throw InputError("annual_blocks: empty series");

  const HourStamp first = series.start + opts.year_offset_hours;
  const HourStamp last = first + static_cast<HourStamp>(series.size()) - 1;
  std::vector<AnnualBlock> out;
  bool any_full = false;
  for (int y = year_of(first); y <= year_of(last); ++y) {
    const HourStamp y0 = year_start(y);
    const HourStamp y1 = year_start(y + 1);
    const HourStamp lo = std::max(y0, first);
    const HourStamp hi = std::min(y1, last + 1);
    AnnualBlock blk;
    blk.year = y;
    blk.block_size = static_cast<int>(y1 - y0);
    blk.partial = lo > y0 || hi < y1;
    any_full = any_full || !blk.partial;
    if (blk.partial && !opts.include_partial) continue;

    std::optional<double> max;
    int n_obs = 0;
    for (HourStamp h = lo; h < hi; ++h) {
      const double v = series.levels[static_cast<std::size_t>(h - first)];
      if (std::isnan(v)) continue;
      ++n_obs;
      max = max ? std::max(*max, v) : v;
    }
    // Hours of the year outside the series count as missing.
    blk.record = make_block(max, n_obs, blk.block_size - n_obs);
    out.push_back(blk);
  }
  if (!any_full) throw InputError("annual_blocks: series does not span a full calendar year");
  return out;
}

}  // namespace gevmiss
