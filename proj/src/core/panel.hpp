#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace isovol {

// Calendar day as days since 1970-01-01.
using Day = int;

Day parse_date(const std::string& text);  // YYYY-MM-DD
std::string format_date(Day day);
int year_of(Day day);
int month_of(Day day);  // 1..12
// Week index; weeks run Thursday through Wednesday.
int week_of(Day day);

// Price panel: one row per date, one column per asset, NaN marks a missing
// observation.
struct Panel {
  std::vector<Day> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd prices;

  int date_count() const { return static_cast<int>(dates.size()); }
  int asset_count() const { return static_cast<int>(assets.size()); }
  int asset_index(const std::string& name) const;
  // Row of the first date >= day, or date_count() if none.
  int lower_bound(Day day) const;
};

// CSV with a date column followed by one column per asset. With
// returns_input the cells are discrete returns and are chained into a price
// index that starts from 1 before each asset's first return.
Panel load_panel(std::istream& in, bool returns_input);
Panel load_panel_file(const std::string& path, bool returns_input);

// Plain value panel (e.g. traded volume) with the same layout, no conversion.
Panel load_value_panel_file(const std::string& path);

Panel panel_from_returns(std::vector<Day> dates, std::vector<std::string> assets, const Eigen::MatrixXd& returns);

// Last observed price in each week, for every week between the first and
// last panel dates.
struct WeeklyPrices {
  int first_week = 0;
  Eigen::MatrixXd prices;  // weeks x assets

  int week_count() const { return static_cast<int>(prices.rows()); }
};

WeeklyPrices weekly_prices(const Panel& panel);

struct AdmissionRules {
  int window_weeks = 260;
  int max_gap_weeks = 2;
  std::optional<Panel> volumes;
  double liquidity_threshold = 1.5e6;
  int liquidity_days = 365;
};

// Assets with a complete weekly history of window_weeks returns ending before
// the week of `rebalance`, no run of more than max_gap_weeks missing weeks in
// that window, and (when volumes are given) median volume over the prior
// liquidity_days above the threshold.
std::vector<int> admitted_assets(const Panel& panel, const WeeklyPrices& weekly, Day rebalance,
                                 const AdmissionRules& rules);

// window_weeks x assets matrix of weekly returns ending before the week of
// `rebalance`; missing weeks carry the last price forward.
Eigen::MatrixXd window_returns(const WeeklyPrices& weekly, Day rebalance, const std::vector<int>& assets,
                               int window_weeks);

}  // namespace isovol
