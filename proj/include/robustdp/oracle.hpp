#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "robustdp/market_model.hpp"
#include "robustdp/numeric.hpp"

namespace robustdp {

/// A full predictable strategy: one position per internal node. Nodes absent
/// from the map hold the zero position.
using StrategyProfile = std::map<int, Vec>;

/// One extreme transition law per internal node; products of such selections
/// generate the path measures the worst case ranges over.
using KernelSelection = std::map<int, int>;

/// Worst-case expected terminal utility of a FIXED strategy. For a fixed
/// profile the expectation is linear in each node's transition law
/// separately, so the infimum over product measures decomposes node-wise and
/// is attained at polytope vertices: one backward sweep taking the vertex
/// minimum at every node is exact. Leaves reached with negative wealth
/// contribute -inf through the utility convention whenever a vertex charges
/// them.
double fixed_strategy_worst_case(const MarketModel& model,
                                 const StrategyProfile& profile, double x0);

/// Same sweep with max instead of min and U^+ instead of U; used as the
/// integrability surrogate reported by the diagnose command.
double fixed_strategy_best_uplus(const MarketModel& model,
                                 const StrategyProfile& profile, double x0);

/// Expected terminal utility of a fixed strategy under explicit per-node
/// kernels (any points of the polytopes, not only vertices).
double fixed_strategy_expectation(const MarketModel& model,
                                  const StrategyProfile& profile, double x0,
                                  const std::map<int, Vec>& kernels);

struct BruteForceSpec {
    double grid_step = 1e-3;       // target resolution per position axis
    std::uint64_t eval_cap = 10000000;
    int restarts = 5;
    std::uint64_t seed = 987654321;
    int coarse_points = 33;        // per axis, first refinement level
};

struct BruteForceResult {
    double value = neg_inf;
    StrategyProfile profile;
    std::uint64_t evaluations = 0;
};

/// Strategy search scored by fixed_strategy_worst_case: exhaustive grid when
/// the instance allows it (few decision axes), otherwise cyclic coordinate
/// ascent over nodes with per-node line scans, refined around the incumbent
/// and restarted from seeded random points. Positions are searched inside
/// the per-node ball |h| <= bound(depth)/alpha in support-span coordinates.
/// Throws BudgetExceeded instead of running past eval_cap.
BruteForceResult brute_force_value(const MarketModel& model, double x0,
                                   const BruteForceSpec& spec = {});

/// brute_force_value flavour maximizing fixed_strategy_best_uplus; estimates
/// sup over strategies and measures of E[U^+] at initial wealth x0.
BruteForceResult brute_force_best_uplus(const MarketModel& model, double x0,
                                        const BruteForceSpec& spec = {});

}  // namespace robustdp
