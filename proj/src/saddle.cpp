#include "robustdp/saddle.hpp"

#include <algorithm>
#include <cmath>

#include "robustdp/errors.hpp"

namespace robustdp {

namespace {
constexpr double kInvPhi = 0.6180339887498949;   // (sqrt(5)-1)/2
constexpr double kInvPhi2 = 0.3819660112501051;  // 1 - kInvPhi
}  // namespace

ScalarMaxResult maximize_concave_1d(const std::function<double(double)>& f,
                                    double lo, double hi, double anchor,
                                    double value_tol, double x_tol, int max_iter) {
    ScalarMaxResult res;
    if (!(hi > lo)) {
        res.x = lo;
        res.fx = f(lo);
        res.gap = 0.0;
        res.evals = 1;
        return res;
    }
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    double x1 = a + kInvPhi2 * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    res.evals = 4;

    const double scale = std::max({1.0, std::fabs(lo), std::fabs(hi)});
    const double width_floor = 1e-14 * scale;
    const double width_target = std::max(x_tol * scale, width_floor);
    double gap = pos_inf;

    auto record_best = [&]() {
        res.x = x1;
        res.fx = f1;
        if (f2 > res.fx) { res.x = x2; res.fx = f2; }
        if (fa > res.fx) { res.x = a; res.fx = fa; }
        if (fb > res.fx) { res.x = b; res.fx = fb; }
    };

    for (int it = 0; it < max_iter; ++it) {
        record_best();

        // Certified upper bound on sup f over [a,b] from secant extrapolation:
        // a chord between two points of a concave function over-estimates it
        // outside the pair and the outer chords cap the inner segment.
        if (!is_ninf(f1) && !is_ninf(f2)) {
            double s12 = (f2 - f1) / (x2 - x1);
            double ub = std::max(f1 + std::max(0.0, -s12) * (x1 - a),
                                 f2 + std::max(0.0, s12) * (b - x2));
            double mid = pos_inf;  // bound over the inner segment [x1, x2]
            if (!is_ninf(fa)) {
                double sa1 = (f1 - fa) / (x1 - a);
                mid = f1 + std::max(0.0, sa1) * (x2 - x1);
            }
            if (!is_ninf(fb)) {
                double s2b = (fb - f2) / (b - x2);
                mid = std::min(mid, f2 + std::max(0.0, -s2b) * (x2 - x1));
            }
            ub = std::max({ub, f1, f2, mid});
            gap = is_pinf(ub) ? pos_inf : std::max(0.0, ub - res.fx);
            if (gap <= value_tol && b - a <= width_target) break;
        }
        if (b - a < width_floor) break;

        bool drop_left;
        if (is_ninf(f1) && is_ninf(f2)) {
            // both probes outside the effective domain: keep the side
            // containing the anchor (a feasible point by contract)
            drop_left = anchor >= x2 || (anchor > x1 && anchor > 0.5 * (x1 + x2));
        } else {
            drop_left = f2 > f1;  // ties shrink from the right
        }
        if (drop_left) {
            a = x1; fa = f1;
            x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2; fb = f2;
            x2 = x1; f2 = f1;
            x1 = a + kInvPhi2 * (b - a);
            f1 = f(x1);
        }
        ++res.evals;
    }
    record_best();
    if (is_ninf(res.fx)) gap = 0.0;  // nothing lies above an empty domain
    res.gap = gap;
    return res;
}

std::pair<double, int> inner_worst_case(const OnePeriodProblem& problem,
                                        const Vec& h) {
    const std::size_t m = problem.outcomes.size();
    thread_local std::vector<double> values;
    values.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double w = problem.x + dot(h, problem.outcomes[j]);
        if (w < -kFeasSlack) return {neg_inf, -1};
        values[j] = problem.next_value[j](std::max(w, 0.0));
    }
    double best = pos_inf;
    int best_vertex = -1;
    for (std::size_t v = 0; v < problem.vertices.size(); ++v) {
        double e = weighted_value(problem.vertices[v], values);
        if (e < best) {
            best = e;
            best_vertex = static_cast<int>(v);
        }
    }
    return {best, best_vertex};
}

namespace {

/// Recursive nested golden section over the basis coordinates: level k fixes
/// coordinate k and maximizes the remaining ones. Partial maximization of a
/// concave function over a convex section is concave in the fixed
/// coordinate, so the outer search stays valid.
struct CoordinateSearch {
    const OnePeriodProblem& problem;
    const SaddleOptions& opts;
    double radius;  // x / alpha
    long long evals = 0;

    double eval_point(const Vec& coords) {
        ++evals;
        Vec h(problem.geometry.d_basis.front().size(), 0.0);
        for (std::size_t i = 0; i < coords.size(); ++i)
            axpy(coords[i], problem.geometry.d_basis[i], h);
        return inner_worst_case(problem, h).first;
    }

    ScalarMaxResult solve_level(Vec& coords, std::size_t level, double tol) {
        double used = 0.0;
        for (std::size_t i = 0; i < level; ++i) used += coords[i] * coords[i];
        double r = std::sqrt(std::max(0.0, radius * radius - used));
        auto objective = [&](double t) {
            coords[level] = t;
            if (level + 1 == coords.size()) return eval_point(coords);
            Vec inner = coords;
            ScalarMaxResult sub = solve_level(inner, level + 1, tol * 0.25);
            return sub.fx;
        };
        ScalarMaxResult res =
            maximize_concave_1d(objective, -r, r, 0.0, tol, opts.x_tol, opts.max_iter);
        coords[level] = res.x;
        if (level + 1 < coords.size()) {
            // re-run the inner levels at the chosen coordinate so `coords`
            // holds the full argmax, not just its first component
            ScalarMaxResult sub = solve_level(coords, level + 1, tol * 0.25);
            res.fx = std::max(res.fx, sub.fx);
        }
        return res;
    }
};

}  // namespace

SaddleSolution solve_one_period(const OnePeriodProblem& problem,
                                const SaddleOptions& opts) {
    const std::size_t d = problem.outcomes.empty()
                              ? (problem.geometry.barycenter.empty()
                                     ? 1
                                     : problem.geometry.barycenter.size())
                              : problem.outcomes.front().size();
    SaddleSolution sol;
    sol.h_opt.assign(d, 0.0);

    if (problem.x < 0.0) {
        sol.degenerate = true;
        sol.gap = 0.0;
        return sol;
    }

    const int k = problem.geometry.dim;
    auto finish_at = [&](const Vec& h, int iters, double gap) {
        auto [value, vertex] = inner_worst_case(problem, h);
        sol.value = value;
        sol.worst_vertex = vertex;
        sol.h_opt = h;
        sol.iterations = iters;
        sol.gap = gap;
        sol.degenerate = is_ninf(value);
        if (sol.degenerate) {
            sol.h_opt.assign(d, 0.0);
            sol.gap = 0.0;
        }
    };

    if (k == 0) {
        finish_at(Vec(d, 0.0), 1, 0.0);
        return sol;
    }

    if (!(problem.alpha > 0.0))
        throw PreconditionError("solve_one_period: alpha must be positive");
    const double radius = problem.x / problem.alpha;

    if (k == 1) {
        const Vec& e = problem.geometry.d_basis.front();
        double lo = -radius, hi = radius;
        for (const Vec& y : problem.outcomes) {
            double c = dot(e, y);
            if (c > kSpanTol) lo = std::max(lo, -problem.x / c);
            else if (c < -kSpanTol) hi = std::min(hi, problem.x / -c);
        }
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
        auto objective = [&](double t) {
            return inner_worst_case(problem, scaled(e, t)).first;
        };
        ScalarMaxResult res = maximize_concave_1d(objective, lo, hi, 0.0,
                                                  opts.value_tol, opts.x_tol,
                                                  opts.max_iter);
        finish_at(scaled(e, res.x), res.evals, res.gap);
    } else {
        CoordinateSearch search{problem, opts, radius};
        Vec coords(static_cast<std::size_t>(k), 0.0);
        ScalarMaxResult res = search.solve_level(coords, 0, opts.value_tol);
        Vec h(d, 0.0);
        for (std::size_t i = 0; i < coords.size(); ++i)
            axpy(coords[i], problem.geometry.d_basis[i], h);
        finish_at(h, static_cast<int>(std::min<long long>(search.evals, 1 << 30)),
                  res.gap + opts.value_tol * 0.5);
    }

    // The search never samples h = 0 exactly, but 0 is always feasible and is
    // the only finite point when discretized continuations collapse near the
    // wealth floor; keep it as a candidate.
    if (k >= 1) {
        auto [zero_value, zero_vertex] = inner_worst_case(problem, Vec(d, 0.0));
        if (zero_value > sol.value) {
            sol.value = zero_value;
            sol.worst_vertex = zero_vertex;
            sol.h_opt.assign(d, 0.0);
            sol.degenerate = false;
        }
    }

    // Flat maxima: report the shortest optimizer on the segment toward h = 0.
    if (!sol.degenerate && norm2(sol.h_opt) > kFeasSlack) {
        double lo = 0.0, hi = 1.0;
        auto value_at = [&](double t) {
            return inner_worst_case(problem, scaled(sol.h_opt, t)).first;
        };
        if (value_at(0.0) >= sol.value - 1e-12) {
            lo = hi = 0.0;
        } else {
            for (int i = 0; i < 40 && hi - lo > 1e-12; ++i) {
                double mid = 0.5 * (lo + hi);
                if (value_at(mid) >= sol.value - 1e-12) hi = mid;
                else lo = mid;
            }
        }
        if (hi < 1.0 - 1e-9) {
            sol.nonunique = true;
            sol.h_opt = scaled(sol.h_opt, hi);
            auto [value, vertex] = inner_worst_case(problem, sol.h_opt);
            sol.value = value;
            sol.worst_vertex = vertex;
        }
    }
    return sol;
}

std::vector<double> rational_sup_check(const OnePeriodProblem& problem,
                                       int levels, std::uint64_t eval_cap) {
    std::vector<double> out;
    if (problem.x < 0.0) {
        out.assign(static_cast<std::size_t>(levels), neg_inf);
        return out;
    }
    const std::size_t d = problem.outcomes.empty()
                              ? 1
                              : problem.outcomes.front().size();
    const double radius = problem.alpha > 0.0 ? problem.x / problem.alpha + 1.0
                                              : problem.x + 1.0;
    double prev = neg_inf;
    for (int k = 1; k <= levels; ++k) {
        const double mesh = std::ldexp(1.0, -k);
        const long long half = static_cast<long long>(std::floor(radius / mesh));
        const long long per_axis = 2 * half + 1;
        double total = 1.0;
        for (std::size_t i = 0; i < d; ++i) total *= static_cast<double>(per_axis);
        if (total > static_cast<double>(eval_cap))
            throw BudgetExceeded("rational_sup_check: lattice of " +
                                 std::to_string(total) + " points exceeds budget");

        double best = neg_inf;
        std::vector<long long> idx(d, -half);
        Vec h(d, 0.0);
        bool done = false;
        while (!done) {
            for (std::size_t i = 0; i < d; ++i)
                h[i] = static_cast<double>(idx[i]) * mesh;
            best = std::max(best, inner_worst_case(problem, h).first);
            std::size_t pos = 0;
            while (pos < d) {
                if (++idx[pos] <= half) break;
                idx[pos] = -half;
                ++pos;
            }
            done = pos == d;
        }
        best = std::max(best, prev);  // nested grids: never decreases
        out.push_back(best);
        prev = best;
    }
    return out;
}

OnePeriodProblem make_one_period_problem(const MarketModel& model,
                                         const NonPolarMask& mask,
                                         const NodeGeometry& geometry,
                                         double alpha, int node, double x,
                                         std::vector<ValueFn> next_value) {
    OnePeriodProblem p;
    p.geometry = geometry;
    p.alpha = alpha;
    p.x = x;
    p.children = geometry.support_children;
    p.outcomes = geometry.support_points;
    p.next_value = std::move(next_value);
    if (p.next_value.size() != p.outcomes.size())
        throw PreconditionError("one continuation function per non-polar child required");

    auto deltas = delta_s(model, node);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < deltas.size(); ++c)
        if (mask(deltas[c].first)) kept.push_back(c);
    for (const Vec& v : model.priors[node].vertices) {
        Vec row;
        row.reserve(kept.size());
        for (std::size_t c : kept) row.push_back(std::max(v[c], 0.0));
        p.vertices.push_back(std::move(row));
    }
    return p;
}

}  // namespace robustdp
