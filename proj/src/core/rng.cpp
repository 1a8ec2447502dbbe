#include "core/rng.hpp"

#include "core/errors.hpp"

namespace isovol {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::degenerate_level: return "DegenerateLevel";
    case Errc::off_simplex_affine_hull: return "OffSimplexAffineHull";
    case Errc::degenerate_simplex: return "DegenerateSimplex";
    case Errc::empty_intersection: return "EmptyIntersection";
    case Errc::numerically_on_boundary: return "NumericallyOnBoundary";
    case Errc::no_crossing: return "NoCrossing";
    case Errc::anchor_outside_simplex: return "AnchorOutsideSimplex";
    case Errc::tangent_facet: return "TangentFacet";
    case Errc::volumes_not_cached: return "VolumesNotCached";
    case Errc::degenerate_mean: return "DegenerateMean";
    case Errc::schedule_stall: return "ScheduleStall";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::malformed_csv: return "MalformedCsv";
    case Errc::non_monotone_dates: return "NonMonotoneDates";
    case Errc::too_few_observations: return "TooFewObservations";
    case Errc::too_few_assets: return "TooFewAssets";
    case Errc::coverage_gap: return "CoverageGap";
    case Errc::too_short_series: return "TooShortSeries";
    case Errc::degenerate_variance: return "DegenerateVariance";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 1));
}

Eigen::VectorXd Rng::normal_vector(int d) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd Rng::unit_vector(int d) {
  for (;;) {
    Eigen::VectorXd v = normal_vector(d);
    const double n = v.norm();
    if (n > 1e-300) return v / n;
  }
}

}  // namespace isovol
