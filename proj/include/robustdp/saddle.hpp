#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "robustdp/arbitrage.hpp"
#include "robustdp/market_model.hpp"
#include "robustdp/numeric.hpp"

namespace robustdp {

/// Constraint slack for the one-step budget set H_x.
inline constexpr double kFeasSlack = 1e-10;

/// Extended-real continuation value as a function of wealth: either an exact
/// utility at the last trading date or a ConcaveValueTable lookup.
using ValueFn = std::function<double(double)>;

/// One node, one wealth level: everything solve_one_period needs. Outcomes
/// and vertex rows are restricted to non-polar children (polar children
/// carry probability zero under every vertex, so nothing is renormalized).
struct OnePeriodProblem {
    std::vector<Vec> outcomes;        // price increment per non-polar child
    std::vector<int> children;        // model node index per outcome
    std::vector<Vec> vertices;        // polytope vertices over the outcomes
    std::vector<ValueFn> next_value;  // continuation value per outcome
    double x = 0.0;                   // current wealth
    double alpha = 1.0;               // certified margin; bounds |h| by x/alpha
    NodeGeometry geometry;
};

struct SaddleOptions {
    double value_tol = 1e-8;
    double x_tol = 1e-6;  // bracket width target for the optimizer itself
    int max_iter = 10000;
};

struct SaddleSolution {
    double value = neg_inf;
    Vec h_opt;
    int worst_vertex = -1;
    int iterations = 0;
    double gap = pos_inf;
    bool degenerate = false;  // empty effective domain (objective is -inf)
    bool nonunique = false;   // a strictly shorter optimizer achieved the value
};

/// Worst vertex expectation of the continuation at position h:
///   min over vertices P of  sum_j P_j * V_j(x + h.y_j),
/// ties broken by lowest vertex index. Returns (-inf, -1) when h violates
/// the budget set H_x.
std::pair<double, int> inner_worst_case(const OnePeriodProblem& problem,
                                        const Vec& h);

/// Concave maximization of inner_worst_case over D_x = H_x n span(d_basis),
/// searched in basis coordinates inside the ball of radius x/alpha:
/// golden section for one spanned dimension, nested golden section with
/// feasibility clipping above that. The returned optimizer is the shortest
/// one found on the segment toward 0 (flat maxima are reported, not hidden).
SaddleSolution solve_one_period(const OnePeriodProblem& problem,
                                const SaddleOptions& opts = {});

/// Best value over the dyadic-rational positions of mesh 2^-k inside H_x,
/// for k = 1..levels. Nested grids make the sequence non-decreasing; it
/// converges to the solve_one_period value. Guarded by an evaluation budget
/// (the lattice grows like 2^(k d)).
std::vector<double> rational_sup_check(const OnePeriodProblem& problem,
                                       int levels,
                                       std::uint64_t eval_cap = 200000000ULL);

/// Assembles the one-period problem at `node` with wealth x. Continuations
/// come from `next_value` supplied per child by the caller.
OnePeriodProblem make_one_period_problem(const MarketModel& model,
                                         const NonPolarMask& mask,
                                         const NodeGeometry& geometry,
                                         double alpha, int node, double x,
                                         std::vector<ValueFn> next_value);

}  // namespace robustdp
