#pragma once

#include <vector>

#include "robustdp/arbitrage.hpp"
#include "robustdp/market_model.hpp"
#include "robustdp/saddle.hpp"
#include "robustdp/value_table.hpp"

namespace robustdp {

struct GridSpec {
    int knot_count = 257;      // per-depth target, linear part plus refinement
    double safety = 1.25;      // inflation of the reachable-wealth bound
    int geometric_levels = 20; // refinement near 0 reaches bound_0 * 2^-levels
};

/// Per-depth wealth grids. The bound at depth t is
///   safety * x0 * prod_{s<=t} (1 + max|dS_s| / alpha_{s-1}),
/// which dominates every admissible wealth path; knots are shared by all
/// nodes of equal depth. The geometric tail stops at a floor common to all
/// depths so that a positive knot never queries a child table inside its
/// first (possibly -inf) segment.
struct WealthGrid {
    std::vector<double> bounds;     // size horizon + 1
    std::vector<Vec> knots;         // size horizon + 1
    double floor = 0.0;
};

WealthGrid build_grid(const MarketModel& model, double x0,
                      const NAReport& na_report, const GridSpec& spec = {});

struct DpOptions {
    SaddleOptions saddle;
    int threads = 0;  // 0 = hardware concurrency
    /// During policy extraction, continuations are re-solved exactly through
    /// this many levels below the current node before falling back to the
    /// tables; leaves always evaluate the utility directly. Removes the
    /// interpolation bias from the reported values at desk-scale horizons.
    int exact_extraction_depth = 3;
};

/// Value tables per node; polar nodes stay empty and are never queried.
struct ValueSurface {
    std::vector<ConcaveValueTable> tables;

    const ConcaveValueTable& at(int node) const { return tables[node]; }
    bool built(int node) const { return !tables[node].empty(); }
};

/// Backward induction over the tree: depth-T tables sample the leaf utility,
/// every internal table entry is a one-period saddle solve against the
/// children's continuations (exact leaf utilities at the last trading date,
/// tables below). Within a depth the (node, knot) solves are independent and
/// run on a small thread pool.
ValueSurface backward_induct(const MarketModel& model, const NonPolarMask& mask,
                             const NAReport& na_report, const WealthGrid& grid,
                             const DpOptions& opts = {});

struct PolicyRow {
    int node = -1;
    int depth = 0;
    double wealth = 0.0;
    Vec h;                    // empty for leaves
    int worst_vertex = -1;
    double continuation = neg_inf;
};

struct PolicyTrace {
    std::vector<PolicyRow> rows;  // breadth-first over non-polar nodes
    double root_value = neg_inf;

    const PolicyRow* find(int node) const;
};

/// Forward pass from the root: at each non-polar internal node the one-period
/// problem is re-solved at the realized wealth (not at a grid knot) and the
/// optimizer, already inside the support span, is recorded together with its
/// worst-case vertex. Aborts if realized wealth drops below -1e-10.
PolicyTrace extract_policy(const MarketModel& model, const NonPolarMask& mask,
                           const NAReport& na_report, const ValueSurface& surface,
                           double x0, const DpOptions& opts = {});

/// Continuation functions for the non-polar children of `node`: exact leaf
/// utility at the horizon; below it, a recursive one-period solve while
/// exact_depth > 0, otherwise the child's table.
std::vector<ValueFn> continuation_functions(const MarketModel& model,
                                            const NonPolarMask& mask,
                                            const NAReport& na_report,
                                            const ValueSurface& surface, int node,
                                            int exact_depth,
                                            const SaddleOptions& saddle_opts);

/// True iff wealth stays above -1e-10 at every traced node.
bool robust_wealth_floor(const MarketModel& model, const PolicyTrace& trace);

/// Worst-case (largest) conditional expectation of the negative utility part
/// at fixed wealth r, by exact backward recursion with max over vertices.
struct DiagnosticsTable {
    Vec r_values;
    std::vector<Vec> j;  // per node, aligned with r_values; empty for none
    bool uminus_ok = true;

    double j_root(const MarketModel& model, std::size_t r_index) const {
        return j[static_cast<std::size_t>(model.root)][r_index];
    }
};

DiagnosticsTable compute_J(const MarketModel& model, const Vec& r_set);

}  // namespace robustdp
