#include "robustdp/value_table.hpp"

#include <algorithm>
#include <cmath>

#include "robustdp/errors.hpp"

namespace robustdp {

ConcaveValueTable::ConcaveValueTable(Vec knots, Vec values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() < 2 || knots_.size() != values_.size())
        throw PreconditionError("value table needs >= 2 aligned knots");
    if (knots_.front() != 0.0)
        throw PreconditionError("value table must start at wealth 0");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (!(knots_[i] > knots_[i - 1]))
            throw PreconditionError("value table knots must increase strictly");
        if (is_ninf(values_[i]))
            throw PreconditionError("-inf is only allowed at the first knot");
    }
}

double ConcaveValueTable::operator()(double x) const {
    if (x < 0.0) return neg_inf;
    const double top = knots_.back();
    if (x > top) {
        // absorb accumulated roundoff from the wealth recursion, nothing more
        if (x <= top * (1.0 + 1e-9) + 1e-12) return values_.back();
        throw GridRangeError("wealth query " + std::to_string(x) +
                             " above grid top " + std::to_string(top) +
                             " (grid too small)");
    }
    auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin());
    if (i < knots_.size() && knots_[i] == x) return values_[i];
    // x strictly between knots i-1 and i here
    double lo = values_[i - 1];
    if (is_ninf(lo)) return neg_inf;  // segment off the first knot with v(0) = -inf
    double t = (x - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
    return lo + t * (values_[i] - lo);
}

bool ConcaveValueTable::check_concave(double value_tol, std::string* why) const {
    double prev_slope = pos_inf;
    double prev_len = pos_inf;
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (is_ninf(values_[i - 1])) continue;  // first segment, infinite slope
        double len = knots_[i] - knots_[i - 1];
        double slope = (values_[i] - values_[i - 1]) / len;
        double slack = 4.0 * value_tol / std::min(len, prev_len) +
                       1e-9 * (1.0 + std::fabs(slope));
        if (slope > prev_slope + slack) {
            if (why)
                *why = "slope increases at knot " + std::to_string(knots_[i - 1]);
            return false;
        }
        prev_slope = slope;
        prev_len = len;
    }
    return true;
}

bool ConcaveValueTable::check_monotone(double value_tol, std::string* why) const {
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (is_ninf(values_[i - 1])) continue;
        if (values_[i] < values_[i - 1] - 2.0 * value_tol) {
            if (why)
                *why = "value decreases at knot " + std::to_string(knots_[i]);
            return false;
        }
    }
    return true;
}

}  // namespace robustdp
