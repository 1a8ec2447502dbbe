#include "support/oracles.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <map>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace oracle {

using isovol::SimplexH;

Eigen::VectorXd sphere_point(int d, Engine& eng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd x(d);
  double r = 0.0;
  do {
    for (int i = 0; i < d; ++i) x[i] = n(eng);
    r = x.norm();
  } while (r < 1e-12);
  return x / r;
}

bool inside(const SimplexH& s, const Eigen::VectorXd& x, double tol) {
  for (int j = 0; j < s.facets(); ++j)
    if (s.normals.row(j).dot(x) - s.offsets[j] > tol * s.normals.row(j).norm()) return false;
  return true;
}

double facet_margin(const SimplexH& s, const Eigen::VectorXd& x) {
  double m = INFINITY;
  for (int j = 0; j < s.facets(); ++j)
    m = std::min(m, (s.offsets[j] - s.normals.row(j).dot(x)) / s.normals.row(j).norm());
  return m;
}

std::vector<Eigen::VectorXd> rejection_sample(const SimplexH& s, std::size_t n, std::uint64_t seed,
                                              std::size_t max_tries) {
  Engine eng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t t = 0; out.size() < n; ++t) {
    if (t >= max_tries) throw std::runtime_error("rejection oracle: acceptance too low");
    Eigen::VectorXd x = sphere_point(s.dim(), eng);
    if (inside(s, x)) out.push_back(std::move(x));
  }
  return out;
}

double inside_fraction(const SimplexH& s, std::size_t draws, std::uint64_t seed) {
  Engine eng(seed);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < draws; ++i)
    if (inside(s, sphere_point(s.dim(), eng))) ++hit;
  return static_cast<double>(hit) / static_cast<double>(draws);
}

double sphere_area(int d) { return 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0); }

double cap_area(int d, double h) {
  // polar angle from e_d: area(S^{d-2}) * int_0^{acos h} sin^{d-2}(phi) dphi
  const double top = std::acos(std::clamp(h, -1.0, 1.0));
  if (d == 2) return 2.0 * top;
  const int steps = 200000;
  const double dx = top / steps;
  double sum = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * std::pow(std::sin(i * dx), d - 2);
  }
  return sphere_area(d - 1) * sum * dx / 3.0;
}

namespace {

// d+1 unit vectors of a regular simplex centred at the origin of R^d.
std::vector<Eigen::VectorXd> regular_simplex(int d) {
  const int n = d + 1;
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  p.array() -= 1.0 / n;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd coords = q.leftCols(d).transpose() * p;
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i < n; ++i) v.push_back(coords.col(i).normalized());
  return v;
}

Eigen::MatrixXd random_rotation(int d, Engine& eng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(eng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

}  // namespace

SimplexH cap_simplex(int d, double h) {
  std::vector<Eigen::VectorXd> vs;
  const double reach = 10.0 * d;
  if (d == 2) return arc_triangle(2.0 * std::acos(h));
  for (const auto& u : regular_simplex(d - 1)) {
    Eigen::VectorXd v(d);
    v.head(d - 1) = u * reach * d;
    v[d - 1] = h;
    vs.push_back(v);
  }
  Eigen::VectorXd apex = Eigen::VectorXd::Zero(d);
  apex[d - 1] = reach;
  vs.push_back(apex);
  return SimplexH::from_vertices(vs);
}

SimplexH arc_triangle(double length) {
  const double c = std::cos(length / 2.0);
  return SimplexH::from_vertices({Eigen::Vector2d(-20.0, c), Eigen::Vector2d(20.0, c), Eigen::Vector2d(0.0, 20.0)});
}

SimplexH enclosing_simplex(int d, double radius) {
  std::vector<Eigen::VectorXd> vs;
  for (const auto& u : regular_simplex(d)) vs.push_back(u * 1.5 * d * radius);
  return SimplexH::from_vertices(vs);
}

SimplexH random_simplex(int d, Engine& eng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i <= d; ++i) {
      const double r = u(eng) < 0.5 ? 0.2 + 0.6 * u(eng) : 1.3 + 1.7 * u(eng);
      vs.push_back(sphere_point(d, eng) * r);
    }
    try {
      SimplexH s = SimplexH::from_vertices(vs);
      // skip near-degenerate draws
      Eigen::MatrixXd e(d, d);
      for (int i = 0; i < d; ++i) e.col(i) = vs[static_cast<std::size_t>(i) + 1] - vs[0];
      if (std::abs(e.determinant()) < 1e-3) continue;
      return s;
    } catch (const std::exception&) {
    }
  }
}

SimplexH random_cap_body(int d, Engine& eng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::MatrixXd rot = random_rotation(d, eng);
  const double h = -0.2 + 0.6 * u(eng);
  const double radius = (d - 1) * (0.9 + 0.8 * u(eng));
  std::vector<Eigen::VectorXd> vs;
  for (const auto& b : regular_simplex(d - 1)) {
    Eigen::VectorXd v(d);
    v.head(d - 1) = b * radius * (0.8 + 0.45 * u(eng));
    v[d - 1] = h;
    vs.push_back(rot * v);
  }
  Eigen::VectorXd apex = Eigen::VectorXd::Zero(d);
  apex[d - 1] = 2.0 + 3.0 * u(eng);
  vs.push_back(rot * apex);
  return SimplexH::from_vertices(vs);
}

std::vector<Eigen::VectorXd> crossing_points(const SimplexH& s, std::size_t n, Engine& eng) {
  const auto vs = isovol::vertices_of(s);
  std::gamma_distribution<double> ga(0.3, 1.0);
  auto point = [&] {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(s.dim());
    double total = 0.0;
    for (const auto& v : vs) {
      const double w = ga(eng) + 1e-300;
      y += w * v;
      total += w;
    }
    return Eigen::VectorXd(y / total);
  };
  std::vector<Eigen::VectorXd> out;
  std::size_t tries = 0;
  while (out.size() < n && tries < 200 * n) {
    ++tries;
    const Eigen::VectorXd a = point(), b = point();
    // |a + t (b - a)| = 1
    const Eigen::VectorXd e = b - a;
    const double qa = e.squaredNorm(), qb = 2.0 * a.dot(e), qc = a.squaredNorm() - 1.0;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (qa < 1e-18 || disc < 0.0) continue;
    for (double sign : {-1.0, 1.0}) {
      const double t = (-qb + sign * std::sqrt(disc)) / (2.0 * qa);
      if (t < 0.0 || t > 1.0) continue;
      const Eigen::VectorXd x = (a + t * e).normalized();
      if (inside(s, x)) out.push_back(x);
    }
  }
  return out;
}

bool arc_inside(const SimplexH& s, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const double c = std::clamp(p.dot(q), -1.0, 1.0);
  const double omega = std::acos(c);
  if (omega < 1e-12) return true;
  if (omega > M_PI - 1e-6) return false;
  const Eigen::VectorXd v = (q - c * p).normalized();
  for (int j = 0; j < s.facets(); ++j) {
    // a^T x(t) = A cos t + B sin t on [0, omega]
    const double a = s.normals.row(j).dot(p);
    const double b = s.normals.row(j).dot(v);
    double peak = std::max(a, a * std::cos(omega) + b * std::sin(omega));
    const double t = std::atan2(b, a);
    if (t >= 0.0 && t <= omega) peak = std::hypot(a, b);
    if (peak > s.offsets[j]) return false;
  }
  return true;
}

std::vector<int> linked_components(const SimplexH& s, const std::vector<Eigen::VectorXd>& pts, int* count,
                                   Engine& eng, std::size_t witnesses) {
  const std::size_t n = pts.size();
  const auto vs = isovol::vertices_of(s);
  std::gamma_distribution<double> sparser(0.1, 1.0), sparse(0.3, 1.0), flat(1.0, 1.0);
  std::vector<Eigen::VectorXd> us;
  for (const auto& v : vs)
    if (v.norm() > 1.0) us.push_back(v);
  for (std::size_t t = 0; us.size() < witnesses && t < 50 * witnesses; ++t) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(s.dim());
    double total = 0.0;
    for (const auto& v : vs) {
      const double w = (t % 3 == 0 ? flat(eng) : t % 3 == 1 ? sparse(eng) : sparser(eng)) + 1e-300;
      y += w * v;
      total += w;
    }
    y /= total;
    if (y.norm() > 1.0) us.push_back(y);
  }
  std::vector<std::size_t> parent(n + us.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](std::size_t i, std::size_t j) { parent[find(i)] = find(j); };
  // x and y share a component when one point of the simplex lies above both tangent planes
  for (std::size_t i = 0; i < n; ++i) {
    if (facet_margin(s, pts[i]) <= 0.0) continue;
    for (std::size_t k = 0; k < us.size(); ++k)
      if (us[k].dot(pts[i]) > 1.0) unite(i, n + k);
  }
  // each point lifted slightly off the sphere is a witness for it
  const std::size_t drawn = us.size();
  for (std::size_t i = 0; i < n; ++i) {
    double room = 1.0;
    for (int j = 0; j < s.facets(); ++j) {
      const double a = s.normals.row(j).dot(pts[i]);
      if (a > 0.0) room = std::min(room, (s.offsets[j] - a) / a);
    }
    if (room <= 0.0) continue;
    us.push_back((1.0 + 0.5 * room) * pts[i]);
    parent.push_back(parent.size());
    unite(i, parent.size() - 1);
  }
  // outside points joined by a segment that misses the ball
  std::vector<std::size_t> hub;
  for (std::size_t k = 0; k < us.size(); ++k)
    if (k < vs.size() || k >= drawn || k % 10 == 0) hub.push_back(k);
  for (std::size_t a = 0; a < hub.size(); ++a)
    for (std::size_t b = a + 1; b < hub.size(); ++b) {
      const Eigen::VectorXd& p = us[hub[a]];
      const Eigen::VectorXd& q = us[hub[b]];
      if (find(n + hub[a]) == find(n + hub[b])) continue;
      const Eigen::VectorXd e = q - p;
      const double t = std::clamp(-p.dot(e) / std::max(e.squaredNorm(), 1e-300), 0.0, 1.0);
      if ((p + t * e).squaredNorm() > 1.0) unite(n + hub[a], n + hub[b]);
    }
  std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j)) pairs.push_back({-pts[i].dot(pts[j]), {i, j}});
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [_, ij] : pairs)
    if (find(ij.first) != find(ij.second) && arc_inside(s, pts[ij.first], pts[ij.second])) unite(ij.first, ij.second);
  std::map<std::size_t, int> compact;
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = compact.emplace(find(i), static_cast<int>(compact.size())).first;
    label[i] = it->second;
  }
  *count = static_cast<int>(compact.size());
  return label;
}

Histogram histogram(const std::vector<Eigen::VectorXd>& pts, int bins) {
  Histogram h;
  h.bins = bins;
  if (pts.empty()) return h;
  const int d = static_cast<int>(pts[0].size());
  h.marginals.assign(static_cast<std::size_t>(d), std::vector<double>(static_cast<std::size_t>(bins), 0.0));
  for (const auto& x : pts)
    for (int k = 0; k < d; ++k) {
      int b = static_cast<int>((x[k] + 1.0) / 2.0 * bins);
      b = std::clamp(b, 0, bins - 1);
      h.marginals[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)] += 1.0;
    }
  for (auto& m : h.marginals)
    for (auto& v : m) v /= static_cast<double>(pts.size());
  return h;
}

double tv(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double max_marginal_tv(const Histogram& a, const Histogram& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.marginals.size(); ++k) m = std::max(m, tv(a.marginals[k], b.marginals[k]));
  return m;
}

double vmf_mean_resultant(int d, double alpha) {
  if (alpha == 0.0) return 0.0;
  return std::cyl_bessel_i(d / 2.0, alpha) / std::cyl_bessel_i(d / 2.0 - 1.0, alpha);
}

double vmf_lower_hemisphere_mass(int d, double alpha) {
  // density of t = mu^T x on [-1, 1] is proportional to exp(alpha t) (1 - t^2)^{(d-3)/2};
  // with t = cos(phi) it is exp(alpha cos phi) sin^{d-2} phi on [0, pi]
  const int steps = 400000;
  const double dx = M_PI / steps;
  double lower = 0.0, total = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double phi = i * dx;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double f = w * std::exp(alpha * (std::cos(phi) - 1.0)) * std::pow(std::sin(phi), d - 2);
    total += f;
    if (phi > M_PI / 2.0) lower += f;
    else if (i == steps / 2) lower += 0.5 * f;
  }
  return lower / total;
}

isovol::Panel synthetic_panel(std::uint64_t seed, const PanelSpec& spec) {
  Engine eng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int weeks = spec.years * 52;
  std::vector<isovol::Day> dates;
  const isovol::Day start = isovol::parse_date("2000-01-05");
  for (int w = 0; w < weeks; ++w) dates.push_back(start + 7 * w);
  std::vector<std::string> names;
  Eigen::VectorXd beta(spec.assets), drift(spec.assets);
  for (int i = 0; i < spec.assets; ++i) {
    names.push_back("A" + std::to_string(i));
    beta[i] = spec.beta_lo + (spec.beta_hi - spec.beta_lo) * i / (spec.assets - 1.0);
    drift[i] = (spec.premium + spec.beta_slope * beta[i]) / 52.0;
  }
  const double fvol = spec.factor_vol / std::sqrt(52.0);
  const double ivol = spec.idio_vol / std::sqrt(52.0);
  Eigen::MatrixXd r(weeks, spec.assets);
  const double fvol_end = spec.factor_vol_end > 0 ? spec.factor_vol_end / std::sqrt(52.0) : fvol;
  for (int w = 0; w < weeks; ++w) {
    const double f = n(eng) * (fvol + (fvol_end - fvol) * w / std::max(1.0, weeks - 1.0));
    for (int i = 0; i < spec.assets; ++i) {
      r(w, i) = drift[i] + beta[i] * f + ivol * n(eng);
      if (spec.jump_prob > 0.0 && u(eng) < spec.jump_prob) r(w, i) += spec.jump_size;
    }
  }
  return isovol::panel_from_returns(dates, names, r);
}

void write_panel_csv(const isovol::Panel& p, const std::string& path) {
  std::ofstream out(path);
  out << "date";
  for (const auto& a : p.assets) out << "," << a;
  out << "\n";
  char buf[32];
  for (int t = 0; t < p.date_count(); ++t) {
    out << isovol::format_date(p.dates[static_cast<std::size_t>(t)]);
    for (int a = 0; a < p.asset_count(); ++a) {
      const double v = p.prices(t, a);
      if (std::isnan(v)) {
        out << ",";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << "," << buf;
      }
    }
    out << "\n";
  }
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle

namespace oracle {

long long SphereGrid::key(const Eigen::Vector3d& x) const {
  const auto c = [&](double v) { return static_cast<long long>(std::floor((v + 1.0) / cell)); };
  return (c(x[0]) * 4096 + c(x[1])) * 4096 + c(x[2]);
}

int SphereGrid::label_near(const Eigen::Vector3d& x) const {
  const auto c = [&](double v) { return static_cast<long long>(std::floor((v + 1.0) / cell)); };
  const long long cx = c(x[0]), cy = c(x[1]), cz = c(x[2]);
  double best = 3.0 * spacing;
  int out = -2;
  for (long long i = cx - 2; i <= cx + 2; ++i)
    for (long long j = cy - 2; j <= cy + 2; ++j)
      for (long long k = cz - 2; k <= cz + 2; ++k) {
        const auto it = cells.find((i * 4096 + j) * 4096 + k);
        if (it == cells.end()) continue;
        for (int p : it->second) {
          const double dist = (points[static_cast<std::size_t>(p)] - x).norm();
          if (dist < best) {
            best = dist;
            out = label[static_cast<std::size_t>(p)];
          }
        }
      }
  return out;
}

SphereGrid grid_components(const isovol::SimplexH& s, std::size_t n) {
  SphereGrid g;
  g.points.resize(n);
  g.label.assign(n, -1);
  g.spacing = std::sqrt(4.0 * M_PI / static_cast<double>(n));
  g.cell = 2.0 * g.spacing;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<int> inside_ids;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    g.points[i] = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
    if (inside(s, g.points[i])) {
      g.label[i] = 0;
      inside_ids.push_back(static_cast<int>(i));
      g.cells[g.key(g.points[i])].push_back(static_cast<int>(i));
    }
  }
  for (int id : inside_ids) g.label[static_cast<std::size_t>(id)] = -3;  // unvisited
  const double reach = 1.8 * g.spacing;
  const auto c = [&](double v) { return static_cast<long long>(std::floor((v + 1.0) / g.cell)); };
  std::vector<int> stack;
  for (int seed : inside_ids) {
    if (g.label[static_cast<std::size_t>(seed)] != -3) continue;
    const int lab = g.count++;
    g.label[static_cast<std::size_t>(seed)] = lab;
    stack.push_back(seed);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const Eigen::Vector3d& x = g.points[static_cast<std::size_t>(p)];
      const long long cx = c(x[0]), cy = c(x[1]), cz = c(x[2]);
      for (long long i = cx - 1; i <= cx + 1; ++i)
        for (long long j = cy - 1; j <= cy + 1; ++j)
          for (long long k = cz - 1; k <= cz + 1; ++k) {
            const auto it = g.cells.find((i * 4096 + j) * 4096 + k);
            if (it == g.cells.end()) continue;
            for (int q : it->second) {
              if (g.label[static_cast<std::size_t>(q)] != -3) continue;
              if ((g.points[static_cast<std::size_t>(q)] - x).norm() > reach) continue;
              g.label[static_cast<std::size_t>(q)] = lab;
              stack.push_back(q);
            }
          }
    }
  }

  // Slivers thinner than the grid break into isolated points. Join every small
  // piece to nearby inside points whenever the arc between them stays inside.
  std::vector<int> size(static_cast<std::size_t>(g.count), 0), parent(static_cast<std::size_t>(g.count));
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<int(int)> find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  for (int id : inside_ids) ++size[static_cast<std::size_t>(g.label[static_cast<std::size_t>(id)])];
  const double far = 20.0 * g.spacing;
  for (int p : inside_ids) {
    if (size[static_cast<std::size_t>(g.label[static_cast<std::size_t>(p)])] >= 100) continue;
    const Eigen::Vector3d& x = g.points[static_cast<std::size_t>(p)];
    const long long cx = c(x[0]), cy = c(x[1]), cz = c(x[2]);
    for (long long i = cx - 10; i <= cx + 10; ++i)
      for (long long j = cy - 10; j <= cy + 10; ++j)
        for (long long k = cz - 10; k <= cz + 10; ++k) {
          const auto it = g.cells.find((i * 4096 + j) * 4096 + k);
          if (it == g.cells.end()) continue;
          for (int q : it->second) {
            const int a = find(g.label[static_cast<std::size_t>(p)]);
            const int b = find(g.label[static_cast<std::size_t>(q)]);
            if (a == b) continue;
            const Eigen::Vector3d& y = g.points[static_cast<std::size_t>(q)];
            if ((y - x).norm() > far) continue;
            if (arc_inside(s, x, y)) parent[static_cast<std::size_t>(a)] = b;
          }
        }
  }
  std::vector<int> compact(static_cast<std::size_t>(g.count), -1);
  int merged = 0;
  for (int id : inside_ids) {
    const int r = find(g.label[static_cast<std::size_t>(id)]);
    if (compact[static_cast<std::size_t>(r)] < 0) compact[static_cast<std::size_t>(r)] = merged++;
    g.label[static_cast<std::size_t>(id)] = compact[static_cast<std::size_t>(r)];
  }
  g.count = merged;
  return g;
}

}  // namespace oracle

namespace oracle {

double ks_uniform(std::vector<double> xs, double lo, double hi) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = (xs[i] - lo) / (hi - lo);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_p_value(double d, double n_eff) {
  const double lambda = (std::sqrt(n_eff) + 0.12 + 0.11 / std::sqrt(n_eff)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

// Regularized lower incomplete gamma P(a, x) by series / continued fraction.
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace

double chi_square_p(double stat, int dof) { return 1.0 - gamma_p(dof / 2.0, stat / 2.0); }

isovol::SimplexH two_cap_simplex() {
  return isovol::SimplexH::from_vertices({Eigen::Vector3d(3, 0, 0), Eigen::Vector3d(-3, 0, 0),
                                          Eigen::Vector3d(0, 0.5, 0.3), Eigen::Vector3d(0, -0.5, 0.3)});
}

}  // namespace oracle
