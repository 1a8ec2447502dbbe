#include "core/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/diagnostics.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/sphere_geometry.hpp"

namespace isovol {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// Last observed price at or before `row`.
double carried_price(const Panel& panel, int row, int asset) {
  for (int r = row; r >= 0; --r)
    if (!std::isnan(panel.prices(r, asset))) return panel.prices(r, asset);
  fail(Errc::coverage_gap, "no price for " + panel.assets[static_cast<std::size_t>(asset)] + " before " +
                               format_date(panel.dates[static_cast<std::size_t>(std::max(row, 0))]));
}

double exact_price(const Panel& panel, int row, int asset) {
  const double p = panel.prices(row, asset);
  if (std::isnan(p))
    fail(Errc::coverage_gap, "missing price for " + panel.assets[static_cast<std::size_t>(asset)] + " on " +
                                 format_date(panel.dates[static_cast<std::size_t>(row)]));
  return p;
}

// Ranks of values, descending, ties by index: order[k] is the index at rank k.
std::vector<int> descending_order(const std::vector<double>& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

std::vector<int> random_permutation(std::size_t n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
  return p;
}

}  // namespace

LevelSample sample_level(const Eigen::MatrixXd& covariance, double level, std::size_t n, std::uint64_t seed,
                         const LevelSampleOptions& options) {
  const PatchTransform transform = PatchTransform::build(covariance, level);
  PatchBody body(transform.simplex());
  LevelSample out;
  out.components = body.component_count();
  if (out.components == 0) fail(Errc::empty_intersection, "variance level does not meet the open simplex");
  if (out.components > 1) relative_volumes(body, options.volume, derive_seed(seed, 1), options.threads);
  out.weights = body.weights();
  const PatchSamples samples = sample_patch(body, n, options.walk, derive_seed(seed, 2), options.threads);
  for (const auto& c : samples.counters) out.counters += c;
  out.portfolios.reserve(n);
  for (const auto& y : samples.points) out.portfolios.push_back(transform.from_patch(y));
  return out;
}

BacktestConfig backtest_config_from_json(const nlohmann::json& j) {
  BacktestConfig c;
  c.sampling.walk.burn_in = 100;
  if (!j.is_object()) fail(Errc::invalid_argument, "backtest config must be a JSON object");
  c.admission.window_weeks = j.value("window_weeks", c.admission.window_weeks);
  c.admission.max_gap_weeks = j.value("max_gap_weeks", c.admission.max_gap_weeks);
  c.admission.liquidity_threshold = j.value("liquidity_threshold", c.admission.liquidity_threshold);
  c.admission.liquidity_days = j.value("liquidity_days", c.admission.liquidity_days);
  c.levels = j.value("levels", c.levels);
  c.samples_per_level = j.value("samples_per_level", c.samples_per_level);
  const std::string mode = j.value("mode", std::string("random"));
  if (mode == "random")
    c.mode = ConcatMode::random;
  else if (mode == "momentum")
    c.mode = ConcatMode::momentum;
  else
    fail(Errc::invalid_argument, "mode must be 'random' or 'momentum'");
  c.performance.risk_free = j.value("risk_free", 0.0);
  c.performance.geometric_sharpe = j.value("sharpe", std::string("arithmetic")) == "geometric";
  c.in_sample_days = j.value("in_sample_days", c.in_sample_days);
  c.threads = j.value("threads", c.threads);
  c.sampling.walk.burn_in = j.value("burn_in", c.sampling.walk.burn_in);
  if (j.contains("walk_length")) c.sampling.walk.walk_length = j.at("walk_length").get<int>();
  if (j.contains("rho")) c.sampling.walk.rho = j.at("rho").get<int>();
  if (j.contains("tau")) c.sampling.walk.tau = j.at("tau").get<double>();
  if (j.contains("walk")) {
    const std::string w = j.at("walk").get<std::string>();
    if (w == "regcw")
      c.sampling.walk.walk = WalkKind::regcw;
    else if (w == "gcw")
      c.sampling.walk.walk = WalkKind::gcw;
    else
      fail(Errc::invalid_argument, "walk must be 'regcw' or 'gcw'");
  }
  c.sampling.volume.epsilon = j.value("epsilon", c.sampling.volume.epsilon);
  if (c.levels < 1 || c.admission.window_weeks < 2 || c.admission.max_gap_weeks < 0 || c.in_sample_days < 1)
    fail(Errc::invalid_argument, "invalid backtest settings");
  return c;
}

std::vector<Day> rebalance_dates(const Panel& panel, int window_weeks) {
  std::vector<Day> out;
  if (panel.dates.empty()) return out;
  const int first_week = week_of(panel.dates.front());
  int last_key = -1;
  for (const Day d : panel.dates) {
    const int m = month_of(d);
    const int key = year_of(d) * 12 + m;
    if (key == last_key) continue;
    last_key = key;
    if (m % 3 != 0) continue;
    if (week_of(d) - first_week - window_weeks - 1 < 0) continue;
    out.push_back(d);
  }
  return out;
}

BacktestResult run_backtest(const Panel& panel, const BacktestConfig& config, std::uint64_t seed) {
  const std::vector<Day> dates = rebalance_dates(panel, config.admission.window_weeks);
  if (dates.size() < 2) fail(Errc::too_short_series, "panel covers fewer than one full holding quarter");
  const WeeklyPrices weekly = weekly_prices(panel);
  const int quarters = static_cast<int>(dates.size()) - 1;
  const int levels = config.levels;
  const std::size_t n = config.samples_per_level;

  BacktestResult res;
  res.quarters.resize(static_cast<std::size_t>(quarters));
  std::vector<Eigen::MatrixXd> covariances(static_cast<std::size_t>(quarters));
  for (int q = 0; q < quarters; ++q) {
    QuarterRecord& rec = res.quarters[static_cast<std::size_t>(q)];
    rec.rebalance = dates[static_cast<std::size_t>(q)];
    rec.end = dates[static_cast<std::size_t>(q) + 1];
    rec.marks.push_back(rec.rebalance);
    int last_key = year_of(rec.rebalance) * 12 + month_of(rec.rebalance);
    for (int r = panel.lower_bound(rec.rebalance) + 1; r < panel.date_count(); ++r) {
      const Day d = panel.dates[static_cast<std::size_t>(r)];
      if (d > rec.end) break;
      const int key = year_of(d) * 12 + month_of(d);
      if (key != last_key) {
        rec.marks.push_back(d);
        last_key = key;
      }
    }
    rec.assets = admitted_assets(panel, weekly, rec.rebalance, config.admission);
    if (static_cast<int>(rec.assets.size()) < std::max(levels, 2))
      fail(Errc::too_few_assets, "too few admitted assets on " + format_date(rec.rebalance));
    const Eigen::MatrixXd window = window_returns(weekly, rec.rebalance, rec.assets, config.admission.window_weeks);
    covariances[static_cast<std::size_t>(q)] = shrinkage_covariance(window);
    rec.targets = quintile_targets(covariances[static_cast<std::size_t>(q)], column_volatility(window), levels);
    rec.components.assign(static_cast<std::size_t>(levels), 0);
    rec.component_weights.assign(static_cast<std::size_t>(levels), {});
  }

  res.segments.assign(static_cast<std::size_t>(quarters),
                      std::vector<std::vector<std::vector<double>>>(static_cast<std::size_t>(levels)));
  res.in_sample.assign(static_cast<std::size_t>(quarters),
                       std::vector<std::vector<double>>(static_cast<std::size_t>(levels)));
  std::vector<WalkCounters> task_counters(static_cast<std::size_t>(quarters * levels));

  parallel_for(static_cast<std::size_t>(quarters * levels), config.threads, [&](std::size_t task) {
    const int q = static_cast<int>(task) / levels;
    const int l = static_cast<int>(task) % levels;
    QuarterRecord& rec = res.quarters[static_cast<std::size_t>(q)];
    const Eigen::MatrixXd& cov = covariances[static_cast<std::size_t>(q)];
    LevelSampleOptions opts = config.sampling;
    opts.threads = 1;
    const LevelSample sample =
        sample_level(cov, rec.targets.targets[static_cast<std::size_t>(l)], n, derive_seed(seed, 1 + task), opts);
    rec.components[static_cast<std::size_t>(l)] = sample.components;
    rec.component_weights[static_cast<std::size_t>(l)] = sample.weights;
    task_counters[task] = sample.counters;

    const int entry = panel.lower_bound(rec.rebalance);
    std::vector<int> mark_rows;
    for (const Day d : rec.marks) mark_rows.push_back(panel.lower_bound(d));
    const int is_start = panel.lower_bound(rec.rebalance - config.in_sample_days);
    const int is_end = entry - 1;
    if (is_start > is_end) fail(Errc::coverage_gap, "no in-sample quarter before " + format_date(rec.rebalance));

    const std::size_t k = rec.assets.size();
    Eigen::MatrixXd growth(static_cast<Eigen::Index>(mark_rows.size()), static_cast<Eigen::Index>(k));
    Eigen::VectorXd is_growth(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const int a = rec.assets[j];
      const double p0 = exact_price(panel, entry, a);
      for (std::size_t m = 0; m < mark_rows.size(); ++m)
        growth(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = exact_price(panel, mark_rows[m], a) / p0;
      is_growth[static_cast<Eigen::Index>(j)] = carried_price(panel, is_end, a) / carried_price(panel, is_start, a);
    }
    auto& segs = res.segments[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)];
    auto& ins = res.in_sample[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)];
    segs.reserve(n);
    ins.reserve(n);
    for (const auto& w : sample.portfolios) {
      const Eigen::VectorXd value = growth * w;
      std::vector<double> monthly;
      for (Eigen::Index m = 1; m < value.size(); ++m) monthly.push_back(value[m] / value[m - 1] - 1.0);
      segs.push_back(std::move(monthly));
      ins.push_back(is_growth.dot(w) - 1.0);
    }
  });
  for (const auto& c : task_counters) res.counters += c;

  // Concatenation.
  res.pairing.assign(static_cast<std::size_t>(quarters),
                     std::vector<std::vector<int>>(static_cast<std::size_t>(levels), std::vector<int>(n)));
  res.paths.assign(static_cast<std::size_t>(levels), std::vector<std::vector<double>>(n));
  for (int l = 0; l < levels; ++l) {
    auto& paths = res.paths[static_cast<std::size_t>(l)];
    std::vector<double> last_segment(n, 0.0);
    for (int q = 0; q < quarters; ++q) {
      auto& pairing = res.pairing[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)];
      const auto& segs = res.segments[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)];
      if (config.mode == ConcatMode::random) {
        Rng rng(seed, 5'000'000 + static_cast<std::uint64_t>(q * levels + l));
        pairing = random_permutation(n, rng);
      } else {
        const std::vector<int> samples_by_rank =
            descending_order(res.in_sample[static_cast<std::size_t>(q)][static_cast<std::size_t>(l)]);
        if (q == 0) {
          pairing = samples_by_rank;
        } else {
          const std::vector<int> paths_by_rank = descending_order(last_segment);
          for (std::size_t r = 0; r < n; ++r) pairing[static_cast<std::size_t>(paths_by_rank[r])] = samples_by_rank[r];
        }
      }
      for (std::size_t p = 0; p < n; ++p) {
        const auto& seg = segs[static_cast<std::size_t>(pairing[p])];
        double g = 1.0;
        for (double r : seg) {
          paths[p].push_back(r);
          g *= 1.0 + r;
        }
        last_segment[p] = g - 1.0;
      }
    }
  }

  res.stats.resize(static_cast<std::size_t>(levels));
  res.clusters.resize(static_cast<std::size_t>(levels));
  res.level_mean_series.resize(static_cast<std::size_t>(levels));
  for (int l = 0; l < levels; ++l) {
    const auto& paths = res.paths[static_cast<std::size_t>(l)];
    std::vector<Eigen::Vector2d> pairs;
    for (const auto& p : paths) {
      const PerformanceStats s = performance_stats(p, config.performance);
      res.stats[static_cast<std::size_t>(l)].push_back(s);
      pairs.emplace_back(s.ann_std, s.ann_return);
    }
    if (pairs.size() >= 30) res.clusters[static_cast<std::size_t>(l)] = cluster_summary(pairs);
    auto& mean_series = res.level_mean_series[static_cast<std::size_t>(l)];
    if (!paths.empty()) {
      mean_series.assign(paths.front().size(), 0.0);
      for (const auto& p : paths)
        for (std::size_t t = 0; t < p.size(); ++t) mean_series[t] += p[t] / static_cast<double>(paths.size());
    }
  }
  res.tests_vs_lowest.resize(static_cast<std::size_t>(levels));
  for (int l = 1; l < levels; ++l) {
    try {
      res.tests_vs_lowest[static_cast<std::size_t>(l)] =
          sharpe_test(res.level_mean_series[static_cast<std::size_t>(l)], res.level_mean_series[0]);
    } catch (const Error&) {
    }
  }
  return res;
}

std::vector<double> BacktestResult::mean_sharpe() const {
  std::vector<double> out;
  for (const auto& level : stats) {
    double s = 0.0;
    std::size_t count = 0;
    for (const auto& st : level)
      if (std::isfinite(st.sharpe)) {
        s += st.sharpe;
        ++count;
      }
    out.push_back(count ? s / static_cast<double>(count) : std::nan(""));
  }
  return out;
}

std::string BacktestResult::stats_csv() const {
  std::string out = "level,path,ann_return,ann_std,sharpe\n";
  for (std::size_t l = 0; l < stats.size(); ++l)
    for (std::size_t p = 0; p < stats[l].size(); ++p) {
      const auto& s = stats[l][p];
      out += std::to_string(l + 1) + "," + std::to_string(p) + "," + format_number(s.ann_return) + "," +
             format_number(s.ann_std) + "," + format_number(s.sharpe) + "\n";
    }
  return out;
}

nlohmann::json BacktestResult::report(const Panel& panel) const {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : quarters) {
    std::vector<std::string> names;
    for (int a : q.assets) names.push_back(panel.assets[static_cast<std::size_t>(a)]);
    std::vector<std::string> marks;
    for (Day d : q.marks) marks.push_back(format_date(d));
    qs.push_back({{"rebalance", format_date(q.rebalance)},
                  {"end", format_date(q.end)},
                  {"months", marks},
                  {"assets", names},
                  {"targets", q.targets.targets},
                  {"target_permutation", q.targets.permutation},
                  {"targets_resorted", q.targets.sorted},
                  {"components", q.components},
                  {"component_weights", q.component_weights}});
  }
  const std::vector<double> sharpe = mean_sharpe();
  nlohmann::json ls = nlohmann::json::array();
  for (std::size_t l = 0; l < stats.size(); ++l) {
    double r = 0.0;
    double s = 0.0;
    for (const auto& st : stats[l]) {
      r += st.ann_return;
      s += st.ann_std;
    }
    const double cnt = stats[l].empty() ? 1.0 : static_cast<double>(stats[l].size());
    nlohmann::json entry = {{"level", l + 1},
                            {"paths", stats[l].size()},
                            {"mean_ann_return", r / cnt},
                            {"mean_ann_std", s / cnt},
                            {"mean_sharpe", number_or_null(sharpe[l])},
                            {"cluster", clusters[l] ? clusters[l]->to_json() : nlohmann::json(nullptr)}};
    if (tests_vs_lowest[l]) {
      const auto& t = *tests_vs_lowest[l];
      entry["sharpe_test_vs_level_1"] = {{"statistic", t.statistic},
                                         {"p_value", t.p_value},
                                         {"difference", t.difference},
                                         {"bandwidth", t.bandwidth}};
    } else {
      entry["sharpe_test_vs_level_1"] = nullptr;
    }
    ls.push_back(std::move(entry));
  }
  return {{"quarters", qs}, {"levels", ls}, {"walk", summarize(counters)}};
}

}  // namespace isovol
