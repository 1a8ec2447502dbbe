#include "core/volume_annealing.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "core/errors.hpp"
#include "core/json_eigen.hpp"
#include "core/parallel.hpp"
#include "core/vmf.hpp"

namespace isovol {

namespace {

// mu^T x shifted so the largest value is 0.
std::vector<double> shifted_projections(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu) {
  std::vector<double> t(samples.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    t[i] = mu.dot(samples[i]);
    top = std::max(top, t[i]);
  }
  for (double& v : t) v -= top;
  return t;
}

double relvar_of(const std::vector<double>& t, double dalpha) {
  if (!std::isfinite(dalpha)) return std::numeric_limits<double>::infinity();
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : t) {
    const double e = std::exp(dalpha * v);
    s1 += e;
    s2 += e * e;
  }
  const double n = static_cast<double>(t.size());
  const double mean = s1 / n;
  if (!(mean > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, s2 / n / (mean * mean) - 1.0);
}

// Sliding-window max/min over the last `size` pushed values.
class Window {
 public:
  explicit Window(std::size_t size) : size_(size) {}

  void push(double v) {
    const std::size_t i = count_++;
    while (!max_.empty() && max_.back().second <= v) max_.pop_back();
    max_.emplace_back(i, v);
    while (!min_.empty() && min_.back().second >= v) min_.pop_back();
    min_.emplace_back(i, v);
    const std::size_t first = count_ > size_ ? count_ - size_ : 0;
    while (max_.front().first < first) max_.pop_front();
    while (min_.front().first < first) min_.pop_front();
  }
  bool full() const { return count_ >= size_; }
  double max() const { return max_.front().second; }
  double min() const { return min_.front().second; }

 private:
  std::size_t size_;
  std::size_t count_ = 0;
  std::deque<std::pair<std::size_t, double>> max_;
  std::deque<std::pair<std::size_t, double>> min_;
};

std::vector<Eigen::VectorXd> draw_vmf_chain(const PatchBody& body, const Eigen::VectorXd& mu, double alpha,
                                            const Eigen::VectorXd& start, std::size_t n, int inner_steps, Rng& rng) {
  WalkState state{start, 0, Rng(rng()), {}};
  const ArcSampler target = vmf_target(mu, alpha, inner_steps);
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    gcw_step(state, body.simplex(), target);
    out.push_back(state.point);
  }
  return out;
}

}  // namespace

nlohmann::json VolumeEstimate::to_json() const {
  return {{"component", component},
          {"volume", volume},
          {"log_volume", log_volume},
          {"epsilon", epsilon},
          {"phases", phases},
          {"schedule", schedule},
          {"log_ratios", log_ratios},
          {"ratio_samples", ratio_samples},
          {"inside_fraction", inside_fraction},
          {"samples", samples},
          {"mu", to_json_vector(mu)},
          {"mu_fallback", mu_fallback},
          {"tau", tau}};
}

Eigen::VectorXd choose_mu(const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) fail(Errc::invalid_argument, "choose_mu needs samples");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(samples.front().size());
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  const double n = mean.norm();
  if (!(n >= 1e-8)) fail(Errc::degenerate_mean, "sample mean is too close to the origin");
  return mean / n;
}

double relative_variance(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, double dalpha) {
  if (samples.empty()) fail(Errc::invalid_argument, "relative_variance needs samples");
  return relvar_of(shifted_projections(samples, mu), dalpha);
}

double first_alpha(const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, double tol) {
  const std::vector<double> t = shifted_projections(samples, mu);
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (relvar_of(t, hi) <= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) fail(Errc::schedule_stall, "uniform sample has no spread along mu");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (relvar_of(t, mid) <= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  if (!(lo > 0.0)) fail(Errc::schedule_stall, "no positive first concentration satisfies the variance bound");
  return lo;
}

double next_alpha(double alpha_prev, const std::vector<Eigen::VectorXd>& samples, const Eigen::VectorXd& mu, int d,
                  double delta, double rel_tol) {
  if (!(alpha_prev > 0.0)) fail(Errc::invalid_argument, "next_alpha needs alpha_prev > 0");
  const std::vector<double> t = shifted_projections(samples, mu);
  const double growth = std::log1p(1.0 / d);
  auto dalpha = [&](double r) { return alpha_prev * std::expm1(r * growth); };
  double r_max = 1.0;
  int n = 0;
  while (relvar_of(t, dalpha(r_max)) <= 1.0) {
    r_max *= 2.0;
    if (++n > 40) fail(Errc::schedule_stall, "sample has no spread along mu");
  }
  double lo = 0.0;
  double hi = r_max;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (relvar_of(t, dalpha(mid)) <= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double v = relvar_of(t, dalpha(lo));
  if (!(lo > 0.0) || v < 1.0 - delta || v > 1.0)
    fail(Errc::schedule_stall, "no schedule step keeps Var/Mean^2 inside [1 - delta, 1]");
  return alpha_prev * std::exp(lo * growth);
}

std::size_t stop_check_draws(double epsilon0, double zeta) {
  if (!(epsilon0 > 0.0 && epsilon0 < 1.0) || !(zeta > 0.0 && zeta < 1.0))
    fail(Errc::invalid_argument, "epsilon0 and zeta must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(std::log(1.0 / (1.0 - zeta)) / (epsilon0 * epsilon0)));
}

bool stop_check(const PatchBody& body, int component, const Eigen::VectorXd& mu, double alpha, double epsilon0,
                double zeta, Rng& rng) {
  const std::size_t nu = stop_check_draws(epsilon0, zeta);
  const double limit = epsilon0 * static_cast<double>(nu);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < nu; ++i) {
    const auto m = body.membership_or_outside(vmf_exact_sample(mu, alpha, rng));
    if (!m || *m != component) ++outside;
    if (static_cast<double>(outside) >= limit) return false;
  }
  return true;
}

RatioResult ratio_estimate(const PatchBody& body, int component, const Eigen::VectorXd& mu, double alpha_prev,
                           double alpha_next, double epsilon_k, std::size_t window,
                           const std::vector<Eigen::VectorXd>& warmup, const Eigen::VectorXd& start, Rng& rng,
                           std::size_t max_samples, int inner_steps) {
  (void)component;
  if (window == 0) fail(Errc::invalid_argument, "window must be positive");
  const double dalpha = alpha_next - alpha_prev;
  // exp(dalpha (mu^T x - 1)) keeps the summands in (0, 1] for dalpha >= 0.
  auto weight = [&](const Eigen::VectorXd& x) { return std::exp(dalpha * (mu.dot(x) - 1.0)); };
  Window w(window);
  double sum = 0.0;
  std::size_t count = 0;
  auto push = [&](const Eigen::VectorXd& x) {
    sum += weight(x);
    ++count;
    w.push(sum / static_cast<double>(count));
    return w.full() && (w.max() - w.min()) / w.min() <= epsilon_k / 2.0;
  };
  auto finish = [&] {
    RatioResult r;
    const double mean = sum / static_cast<double>(count);
    r.log_ratio = std::log(mean) + dalpha;
    r.ratio = std::exp(r.log_ratio);
    r.samples = count;
    return r;
  };
  for (const auto& x : warmup)
    if (push(x)) return finish();

  WalkState state{start, component, Rng(rng()), {}};
  const ArcSampler target = vmf_target(mu, alpha_prev, inner_steps);
  while (count < max_samples) {
    gcw_step(state, body.simplex(), target);
    if (push(state.point)) return finish();
  }
  fail(Errc::non_convergence, "ratio estimate did not converge within the sample cap");
}

VolumeEstimate estimate_volume(const PatchBody& body, int component, const VolumeOptions& options, Rng& rng) {
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) fail(Errc::invalid_argument, "epsilon must lie in (0, 1)");
  if (!(options.delta > 0.0 && options.delta < 1.0)) fail(Errc::invalid_argument, "delta must lie in (0, 1)");
  const Component& comp = body.component(component);
  const int d = body.dim();
  const std::size_t n_schedule = options.schedule_samples.value_or(1200 + static_cast<std::size_t>(d) * d);
  const std::size_t window = options.window.value_or(4 * static_cast<std::size_t>(d) * d + 500);

  VolumeEstimate est;
  est.component = component;
  est.epsilon = options.epsilon;

  ComponentSamples uniform = sample_component(body, component, n_schedule, options.uniform_walk, rng);
  est.samples += n_schedule;
  est.tau = uniform.tau;
  try {
    est.mu = choose_mu(uniform.points);
    // Components need not be geodesically convex; a centroid outside the
    // component would keep the stopping test from ever passing.
    const auto m = body.membership_or_outside(est.mu);
    if (!m || *m != component) {
      est.mu = comp.start.normalized();
      est.mu_fallback = true;
    }
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_mean) throw;
    est.mu = comp.start.normalized();
    est.mu_fallback = true;
  }
  const Eigen::VectorXd& mu = est.mu;

  // Schedule pass: alpha_0 = 0 < alpha_1 < ... < alpha_k, keeping the sample
  // drawn from each f_j for the ratio pass.
  std::vector<double> schedule{0.0};
  std::vector<std::vector<Eigen::VectorXd>> phase_samples{std::move(uniform.points)};
  if (!stop_check(body, component, mu, 0.0, options.epsilon0, options.zeta, rng)) {
    schedule.push_back(first_alpha(phase_samples.back(), mu));
    for (;;) {
      const double alpha = schedule.back();
      if (stop_check(body, component, mu, alpha, options.epsilon0, options.zeta, rng)) break;
      if (static_cast<int>(schedule.size()) > options.max_phases)
        fail(Errc::non_convergence, "annealing schedule exceeded the phase limit");
      phase_samples.push_back(
          draw_vmf_chain(body, mu, alpha, phase_samples.back().back(), n_schedule, options.mh_inner_steps, rng));
      est.samples += n_schedule;
      schedule.push_back(next_alpha(alpha, phase_samples.back(), mu, d, options.delta));
    }
  }
  const int k = static_cast<int>(schedule.size()) - 1;
  est.phases = k;
  est.schedule = schedule;

  double log_volume = log_vmf_integral(d, schedule.back());
  if (k > 0) {
    const double epsilon_k = options.epsilon / (2.0 * std::sqrt(static_cast<double>(k)));
    for (int j = 1; j <= k; ++j) {
      const auto& warm = phase_samples[static_cast<std::size_t>(j - 1)];
      const RatioResult r = ratio_estimate(body, component, mu, schedule[j - 1], schedule[j], epsilon_k, window, warm,
                                           warm.back(), rng, options.max_samples_per_phase, options.mh_inner_steps);
      est.log_ratios.push_back(r.log_ratio);
      est.ratio_samples.push_back(r.samples);
      est.samples += r.samples > warm.size() ? r.samples - warm.size() : 0;
      log_volume -= r.log_ratio;
    }
  }

  // Fraction of the top vMF mass that lies in the component, from a batch
  // sized for a Hoeffding error of epsilon / 4.
  const double half_width = options.epsilon / 4.0;
  const auto n_frac =
      static_cast<std::size_t>(std::ceil(std::log(2.0 / options.zeta) / (2.0 * half_width * half_width)));
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n_frac; ++i) {
    const auto m = body.membership_or_outside(vmf_exact_sample(mu, schedule.back(), rng));
    if (m && *m == component) ++inside;
  }
  est.inside_fraction = static_cast<double>(std::max<std::size_t>(inside, 1)) / static_cast<double>(n_frac);
  log_volume += std::log(est.inside_fraction);

  est.log_volume = std::min(log_volume, log_sphere_area(d));
  est.volume = std::exp(est.log_volume);
  return est;
}

std::vector<VolumeEstimate> relative_volumes(PatchBody& body, const VolumeOptions& options, std::uint64_t seed,
                                             int threads) {
  const int m = body.component_count();
  if (m == 0) fail(Errc::empty_intersection, "the sphere does not meet the simplex");
  std::vector<VolumeEstimate> out(static_cast<std::size_t>(m));
  const PatchBody& view = body;
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t c) {
    Rng rng(seed, 1000 + c);
    out[c] = estimate_volume(view, static_cast<int>(c), options, rng);
  });
  std::vector<double> volumes;
  for (const auto& e : out) {
    body.set_volume(e.component, e.volume);
    volumes.push_back(e.volume);
  }
  body.set_weights(volumes);
  return out;
}

}  // namespace isovol
