#pragma once

#include <stdexcept>
#include <string>

namespace isovol {

// Numeric values are part of the C ABI (see include/isovol/isovol.h).
enum class Errc : int {
  invalid_argument = 1,
  not_positive_definite = 2,
  degenerate_level = 3,
  off_simplex_affine_hull = 4,
  degenerate_simplex = 5,
  empty_intersection = 6,
  numerically_on_boundary = 7,
  no_crossing = 8,
  anchor_outside_simplex = 9,
  tangent_facet = 10,
  volumes_not_cached = 11,
  degenerate_mean = 12,
  schedule_stall = 13,
  non_convergence = 14,
  zero_variance = 15,
  malformed_csv = 16,
  non_monotone_dates = 17,
  too_few_observations = 18,
  too_few_assets = 19,
  coverage_gap = 20,
  too_short_series = 21,
  degenerate_variance = 22,
  io_error = 23,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace isovol
