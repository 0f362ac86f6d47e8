#pragma once

#include <string>
#include <vector>

#include "robustdp/numeric.hpp"

namespace robustdp {

/// Piecewise-linear sample of a concave, non-decreasing value function on a
/// wealth grid. Knots start at 0, where the value may be -inf (and only
/// there); queries below 0 return -inf, queries above the last knot are a
/// hard error rather than a silent extrapolation. Linear interpolation of
/// concave monotone samples stays concave and monotone, which is what the
/// per-depth shape assertions check.
class ConcaveValueTable {
  public:
    ConcaveValueTable() = default;
    ConcaveValueTable(Vec knots, Vec values);

    double operator()(double x) const;

    const Vec& knots() const { return knots_; }
    const Vec& values() const { return values_; }
    bool empty() const { return knots_.empty(); }
    double x_max() const { return knots_.back(); }

    /// Secant slopes non-increasing up to noise: adjacent values carry the
    /// saddle tolerance, so the slack per segment pair scales like
    /// 4 * value_tol / min(segment length).
    bool check_concave(double value_tol, std::string* why = nullptr) const;
    bool check_monotone(double value_tol, std::string* why = nullptr) const;

  private:
    Vec knots_;
    Vec values_;
};

}  // namespace robustdp
