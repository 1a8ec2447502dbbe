#include "core/panel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "core/csv.hpp"
#include "core/errors.hpp"

namespace isovol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::chrono::year_month_day ymd_of(Day day) {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{day}}};
}

struct RawPanel {
  std::vector<Day> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;
};

RawPanel read_raw(std::istream& in) {
  RawPanel p;
  std::string line;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto fields = split_csv_line(s);
    if (!have_header) {
      if (fields.size() < 2) fail(Errc::malformed_csv, "panel needs a date column and at least one asset");
      for (std::size_t i = 1; i < fields.size(); ++i) p.assets.push_back(trim(fields[i]));
      have_header = true;
      continue;
    }
    if (fields.size() != p.assets.size() + 1) fail(Errc::malformed_csv, "row width differs from header");
    const Day day = parse_date(trim(fields[0]));
    if (!p.dates.empty() && day <= p.dates.back()) fail(Errc::non_monotone_dates, "dates must be strictly increasing");
    p.dates.push_back(day);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_cell(fields[i]));
    rows.push_back(std::move(row));
  }
  if (!have_header) fail(Errc::malformed_csv, "panel has no header");
  p.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.assets.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      p.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return p;
}

}  // namespace

Day parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
    fail(Errc::malformed_csv, "bad date '" + text + "', expected YYYY-MM-DD");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) fail(Errc::malformed_csv, "invalid calendar date '" + text + "'");
  return static_cast<Day>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string format_date(Day day) {
  const auto ymd = ymd_of(day);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

int year_of(Day day) { return static_cast<int>(ymd_of(day).year()); }
int month_of(Day day) { return static_cast<int>(static_cast<unsigned>(ymd_of(day).month())); }

int week_of(Day day) {
  // Day 0 is a Thursday.
  return day >= 0 ? day / 7 : -((-day + 6) / 7);
}

int Panel::asset_index(const std::string& name) const {
  const auto it = std::find(assets.begin(), assets.end(), name);
  return it == assets.end() ? -1 : static_cast<int>(it - assets.begin());
}

int Panel::lower_bound(Day day) const {
  return static_cast<int>(std::lower_bound(dates.begin(), dates.end(), day) - dates.begin());
}

Panel load_panel(std::istream& in, bool returns_input) {
  RawPanel raw = read_raw(in);
  Panel p{std::move(raw.dates), std::move(raw.assets), std::move(raw.values)};
  if (!returns_input) {
    for (Eigen::Index r = 0; r < p.prices.rows(); ++r)
      for (Eigen::Index c = 0; c < p.prices.cols(); ++c) {
        const double v = p.prices(r, c);
        if (!std::isnan(v) && !(v > 0.0 && std::isfinite(v))) fail(Errc::malformed_csv, "prices must be positive");
      }
    return p;
  }
  return panel_from_returns(std::move(p.dates), std::move(p.assets), p.prices);
}

Panel load_panel_file(const std::string& path, bool returns_input) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  return load_panel(in, returns_input);
}

Panel load_value_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  RawPanel raw = read_raw(in);
  return Panel{std::move(raw.dates), std::move(raw.assets), std::move(raw.values)};
}

Panel panel_from_returns(std::vector<Day> dates, std::vector<std::string> assets, const Eigen::MatrixXd& returns) {
  if (returns.rows() != static_cast<Eigen::Index>(dates.size()) ||
      returns.cols() != static_cast<Eigen::Index>(assets.size()))
    fail(Errc::invalid_argument, "returns matrix does not match dates and assets");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (dates[i] <= dates[i - 1]) fail(Errc::non_monotone_dates, "dates must be strictly increasing");
  Panel p{std::move(dates), std::move(assets), Eigen::MatrixXd(returns.rows(), returns.cols())};
  for (Eigen::Index c = 0; c < returns.cols(); ++c) {
    double level = 1.0;
    for (Eigen::Index r = 0; r < returns.rows(); ++r) {
      const double v = returns(r, c);
      if (std::isnan(v)) {
        p.prices(r, c) = kNaN;
        continue;
      }
      if (!(v > -1.0) || !std::isfinite(v)) fail(Errc::malformed_csv, "returns must be finite and > -1");
      level *= 1.0 + v;
      p.prices(r, c) = level;
    }
  }
  return p;
}

WeeklyPrices weekly_prices(const Panel& panel) {
  WeeklyPrices w;
  if (panel.dates.empty()) return w;
  w.first_week = week_of(panel.dates.front());
  const int weeks = week_of(panel.dates.back()) - w.first_week + 1;
  w.prices = Eigen::MatrixXd::Constant(weeks, panel.asset_count(), kNaN);
  for (int r = 0; r < panel.date_count(); ++r) {
    const int k = week_of(panel.dates[static_cast<std::size_t>(r)]) - w.first_week;
    for (int c = 0; c < panel.asset_count(); ++c)
      if (!std::isnan(panel.prices(r, c))) w.prices(k, c) = panel.prices(r, c);
  }
  return w;
}

std::vector<int> admitted_assets(const Panel& panel, const WeeklyPrices& weekly, Day rebalance,
                                 const AdmissionRules& rules) {
  std::vector<int> out;
  const int end = week_of(rebalance) - weekly.first_week;  // exclusive
  const int start = end - rules.window_weeks - 1;         // first price of the window
  if (start < 0 || end > weekly.week_count()) return out;
  for (int a = 0; a < panel.asset_count(); ++a) {
    int run = std::numeric_limits<int>::max() / 2;
    bool ok = true;
    for (int k = 0; k < end && ok; ++k) {
      if (std::isnan(weekly.prices(k, a)))
        ++run;
      else
        run = 0;
      if (k >= start && run > rules.max_gap_weeks) ok = false;
    }
    if (!ok) continue;
    if (rules.volumes) {
      const Panel& vol = *rules.volumes;
      const int col = vol.asset_index(panel.assets[static_cast<std::size_t>(a)]);
      if (col < 0) continue;
      std::vector<double> values;
      for (int r = vol.lower_bound(rebalance - rules.liquidity_days); r < vol.lower_bound(rebalance); ++r)
        if (!std::isnan(vol.prices(r, col))) values.push_back(vol.prices(r, col));
      if (values.empty()) continue;
      const std::size_t mid = values.size() / 2;
      std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
      double median = values[mid];
      if (values.size() % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
      }
      if (!(median > rules.liquidity_threshold)) continue;
    }
    out.push_back(a);
  }
  return out;
}

Eigen::MatrixXd window_returns(const WeeklyPrices& weekly, Day rebalance, const std::vector<int>& assets,
                               int window_weeks) {
  const int end = week_of(rebalance) - weekly.first_week;
  const int start = end - window_weeks - 1;
  if (start < 0 || end > weekly.week_count()) fail(Errc::too_few_observations, "not enough weekly history");
  Eigen::MatrixXd out(window_weeks, static_cast<Eigen::Index>(assets.size()));
  for (std::size_t j = 0; j < assets.size(); ++j) {
    const int a = assets[j];
    double last = kNaN;
    for (int k = start; k >= 0 && std::isnan(last); --k) last = weekly.prices(k, a);
    if (std::isnan(last)) fail(Errc::too_few_observations, "asset has no price at the window start");
    for (int k = start + 1; k < end; ++k) {
      const double p = std::isnan(weekly.prices(k, a)) ? last : weekly.prices(k, a);
      out(k - start - 1, static_cast<Eigen::Index>(j)) = p / last - 1.0;
      last = p;
    }
  }
  return out;
}

}  // namespace isovol
