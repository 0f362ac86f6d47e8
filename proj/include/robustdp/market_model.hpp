#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustdp/numeric.hpp"

namespace robustdp {

/// Sum-to-one tolerance for probability vectors; entries below -kProbTol are
/// violations, tiny negatives are clamped to zero on load.
inline constexpr double kProbTol = 1e-12;

/// Convex set of transition laws at an internal node, stored by its vertices.
/// Each vertex is a probability vector over that node's children, in child
/// order; the represented set is the convex hull.
struct PriorPolytope {
    std::vector<Vec> vertices;
};

enum class UtilityFamily { Log, Power, PiecewiseLinear };

/// Leaf-wise affine reweighting of the base utility:
/// U(leaf, x) = weight(leaf) * base(x) + shift(leaf).
struct LeafAdjust {
    double weight = 1.0;
    double shift = 0.0;
};

/// Concave non-decreasing utility of terminal wealth with leaf-measurable
/// randomness. Conventions: U(., x) = -inf for x < 0 and U(., 0) is the right
/// limit at zero (-inf for log, 0 for power, finite for piecewise linear).
struct RandomUtility {
    UtilityFamily family = UtilityFamily::Log;
    double power_p = 0.5;                              // Power only, 0 < p < 1
    std::vector<std::pair<double, double>> knots;      // PiecewiseLinear only
    std::map<std::string, LeafAdjust> per_leaf;        // keyed by leaf id

    double base(double x) const;
    double value_for(const LeafAdjust& adj, double x) const;
};

struct Node {
    std::string id;
    int parent = -1;  // -1 for the root
    int depth = 0;
    Vec prices;
    std::vector<int> children;  // empty iff depth == horizon
};

/// Finite scenario tree with an adapted d-dimensional price field, one prior
/// polytope per internal node and a random utility at the leaves. Immutable
/// once validated; all analysis functions take it by const reference.
struct MarketModel {
    int horizon = 0;
    int asset_count = 0;
    double price_floor = 0.0;
    std::vector<Node> nodes;
    std::vector<PriorPolytope> priors;  // indexed like nodes; empty for leaves
    RandomUtility utility;
    int root = -1;

    bool is_internal(int n) const { return !nodes[n].children.empty(); }
    bool is_leaf(int n) const { return nodes[n].children.empty(); }
    int find_node(const std::string& id) const;  // -1 when absent
    LeafAdjust leaf_adjust(int leaf) const;
    /// U(leaf, x) with the leaf's reweighting applied.
    double utility_at(int leaf, double x) const;
};

struct Violation {
    std::string node_id;  // empty for model-level problems
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> errors;
    std::vector<Violation> warnings;  // e.g. duplicate polytope vertices
    bool valid() const { return errors.empty(); }
};

/// Checks every structural invariant (tree shape, price floor, probability
/// vectors, utility shape) and reports all violations; never throws on a
/// malformed tree.
ValidationReport validate_model(const MarketModel& model);

/// Reachability bookkeeping: a node is non-polar iff its parent is and some
/// polytope vertex charges the connecting edge.
struct NonPolarMask {
    std::vector<char> nonpolar;        // per node
    std::vector<double> max_edge_prob; // per node, 1.0 at the root

    bool operator()(int n) const { return nonpolar[n] != 0; }
};

NonPolarMask nonpolar_mask(const MarketModel& model);

/// Price increments S(child) - S(node) for every child of an internal node.
std::vector<std::pair<int, Vec>> delta_s(const MarketModel& model, int node);

}  // namespace robustdp
