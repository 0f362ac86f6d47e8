#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace robustdp {

using Vec = std::vector<double>;

/// Minus infinity is the one extended-real value the solver traffics in.
/// It enters comparisons and min/max freely; arithmetic with it goes only
/// through the guarded helpers below so it can never turn into a NaN.
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double pos_inf = std::numeric_limits<double>::infinity();

inline bool is_ninf(double x) { return x == neg_inf; }
inline bool is_pinf(double x) { return x == pos_inf; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec scaled(const Vec& a, double c) {
    Vec r(a);
    for (double& x : r) x *= c;
    return r;
}

inline void axpy(double c, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

/// Expectation sum(p_j * v_j) around a baseline so that a constant vector of
/// values propagates exactly (sum of p_j*(v_j - v_0) is an exact zero then).
/// Terms with p_j == 0 are skipped: a null-weighted -inf contributes nothing.
/// Returns -inf as soon as a positively weighted value is -inf.
inline double weighted_value(const Vec& p, const std::vector<double>& v) {
    double base = 0.0;
    bool have_base = false;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] <= 0.0) continue;
        if (is_ninf(v[j])) return neg_inf;
        if (!have_base) { base = v[j]; have_base = true; }
    }
    if (!have_base) return 0.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] <= 0.0) continue;
        acc += p[j] * (v[j] - base);
    }
    return base + acc;
}

struct ScalarMaxResult {
    double x = 0.0;
    double fx = neg_inf;
    double gap = pos_inf;  // certified bound on (sup f) - fx when finite
    int evals = 0;
};

/// Derivative-free maximizer for a concave (possibly -inf valued) function on
/// [lo, hi]. `anchor` must lie in [lo, hi]; when both golden probes land
/// outside the effective domain the bracket shrinks toward it. The gap is
/// certified through secant extrapolation: for concave f the chord through
/// two inner points bounds f outside the pair, so the running bracket yields
/// an upper bound on the supremum. Iterates until the gap is within
/// value_tol AND the bracket is narrower than x_tol (relative to the
/// interval magnitude), so the argmax is located, not just the value.
ScalarMaxResult maximize_concave_1d(const std::function<double(double)>& f,
                                    double lo, double hi, double anchor,
                                    double value_tol, double x_tol, int max_iter);

}  // namespace robustdp
