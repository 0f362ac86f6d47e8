#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustdp/market_model.hpp"
#include "robustdp/numeric.hpp"

namespace robustdp {

/// Span-membership tolerance used throughout the geometry code.
inline constexpr double kSpanTol = 1e-9;
/// Comparison slack for the quantitative margin construction.
inline constexpr double kMarginTol = 1e-12;

/// Quasi-sure one-step geometry at an internal node: the price increments of
/// the non-polar children and an orthonormal basis of the space they span.
/// Under no-arbitrage that span equals the affine hull of the support (it
/// contains the origin); when arbitrage is present the basis describes the
/// barycenter-translated hull instead, for diagnostics only.
struct NodeGeometry {
    std::vector<int> support_children;  // model node index per support point
    std::vector<Vec> support_points;    // increments of non-polar children
    std::vector<Vec> d_basis;           // orthonormal, possibly empty
    int dim = 0;
    bool zero_in_affine_hull = true;
    Vec barycenter;
};

struct NAVerdict {
    bool holds = false;
    Vec certificate;      // one-sided direction when holds == false
    double alpha = 0.0;   // in (0,1] when holds == true and margin computed
    int n0 = 0;           // margin denominator (alpha derives from it)
    bool alpha_exact = true;  // false when the unit sphere was sampled
};

struct SphereSpec {
    int directions = 10000;       // sample count for dim >= 2
    std::uint64_t seed = 20250810;
};

NodeGeometry node_geometry(const MarketModel& model, const NonPolarMask& mask,
                           int node);

/// Orthogonal projection onto span(d_basis). Payoff-preserving: the projected
/// position has the same inner product with every support point.
Vec project_to_D(const NodeGeometry& geometry, const Vec& h);

/// One-step no-arbitrage verdict, decided by the bounded-slack feasibility LP
///   max sum_j s_j   s.t.  h.y_j >= s_j,  0 <= s_j <= 1.
/// The optimum is 0 exactly when no one-sided direction exists; a failing
/// certificate is renormalized and rechecked independently of the LP.
NAVerdict check_na_node(const MarketModel& model, const NonPolarMask& mask,
                        int node);

/// Quantitative margin alpha = 1/n0: n0 is the smallest n >= 1 such that no
/// unit direction h in the support span keeps, under every vertex, the
/// probability of losing at least 1/n below 1/n. Exact for dim <= 1 (the unit
/// sphere is {+e,-e}); for dim >= 2 the sphere is sampled and the certified
/// value 1/(n0_sampled + 1) is returned, which can only enlarge the
/// downstream search box.
double compute_alpha(const MarketModel& model, const NonPolarMask& mask,
                     int node, const SphereSpec& sphere = {});

struct NodeNARecord {
    int node = -1;
    NAVerdict verdict;
    NodeGeometry geometry;
};

struct SnaMargin {
    int node = -1;
    int vertex = -1;
    bool holds = false;
    double alpha = 0.0;  // per-prior margin when holds
};

struct SnaReport {
    bool sna = false;
    std::vector<SnaMargin> margins;
};

struct NAReport {
    std::vector<NodeNARecord> nodes;  // non-polar internal nodes only
    bool na_qT = false;
    SnaReport sna;
    /// The global margin is built with strict tail comparisons at 1e-12 while
    /// the per-prior one is stated with a non-strict inequality; both are
    /// computed the same way here and the asymmetry is recorded in this note.
    std::string margin_note;

    const NodeNARecord* find(int node) const;
    double alpha_at(int node) const;  // 0 when the node failed or is absent
};

NAReport check_na_global(const MarketModel& model, const SphereSpec& sphere = {});

SnaReport check_sna(const MarketModel& model, const SphereSpec& sphere = {});

}  // namespace robustdp
