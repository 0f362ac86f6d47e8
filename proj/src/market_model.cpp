#include "robustdp/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "robustdp/errors.hpp"

namespace robustdp {

double RandomUtility::base(double x) const {
    if (x < 0.0) return neg_inf;
    switch (family) {
        case UtilityFamily::Log:
            return x > 0.0 ? std::log(x) : neg_inf;
        case UtilityFamily::Power:
            return x > 0.0 ? std::pow(x, power_p) : 0.0;
        case UtilityFamily::PiecewiseLinear: {
            // Interpolate inside the knot range, extend the boundary slopes
            // outside it; both extensions keep the function concave and
            // non-decreasing, and give a finite right limit at zero.
            const auto& k = knots;
            if (k.size() == 1) return k.front().second;
            if (x <= k.front().first) {
                double s = (k[1].second - k[0].second) / (k[1].first - k[0].first);
                return k[0].second + s * (x - k[0].first);
            }
            if (x >= k.back().first) {
                std::size_t m = k.size();
                double s = (k[m - 1].second - k[m - 2].second) /
                           (k[m - 1].first - k[m - 2].first);
                return k.back().second + s * (x - k.back().first);
            }
            auto it = std::upper_bound(
                k.begin(), k.end(), x,
                [](double v, const std::pair<double, double>& kn) { return v < kn.first; });
            std::size_t i = static_cast<std::size_t>(it - k.begin());
            double t = (x - k[i - 1].first) / (k[i].first - k[i - 1].first);
            return k[i - 1].second + t * (k[i].second - k[i - 1].second);
        }
    }
    return neg_inf;
}

double RandomUtility::value_for(const LeafAdjust& adj, double x) const {
    double b = base(x);
    if (is_ninf(b)) return neg_inf;
    return adj.weight * b + adj.shift;
}

int MarketModel::find_node(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
}

LeafAdjust MarketModel::leaf_adjust(int leaf) const {
    auto it = utility.per_leaf.find(nodes[leaf].id);
    return it == utility.per_leaf.end() ? LeafAdjust{} : it->second;
}

double MarketModel::utility_at(int leaf, double x) const {
    return utility.value_for(leaf_adjust(leaf), x);
}

namespace {

void check_utility(const MarketModel& model, ValidationReport& rep) {
    const RandomUtility& u = model.utility;
    if (u.family == UtilityFamily::Power &&
        !(u.power_p > 0.0 && u.power_p < 1.0))
        rep.errors.push_back({"", "power utility exponent must lie in (0,1)"});
    if (u.family == UtilityFamily::PiecewiseLinear) {
        if (u.knots.empty()) {
            rep.errors.push_back({"", "piecewise linear utility needs at least one knot"});
        } else {
            double prev_x = neg_inf, prev_s = pos_inf;
            for (std::size_t i = 0; i < u.knots.size(); ++i) {
                if (u.knots[i].first <= prev_x) {
                    rep.errors.push_back({"", "utility knots must be strictly increasing in x"});
                    break;
                }
                if (i > 0) {
                    double s = (u.knots[i].second - u.knots[i - 1].second) /
                               (u.knots[i].first - u.knots[i - 1].first);
                    if (s < -kProbTol)
                        rep.errors.push_back({"", "utility knots must be non-decreasing"});
                    if (s > prev_s + 1e-12)
                        rep.errors.push_back({"", "utility knots must be concave"});
                    prev_s = s;
                }
                prev_x = u.knots[i].first;
            }
        }
    }
    for (const auto& [id, adj] : u.per_leaf) {
        int n = model.find_node(id);
        if (n < 0) {
            rep.errors.push_back({id, "per-leaf utility override names an unknown node"});
            continue;
        }
        if (!model.nodes[n].children.empty() || model.nodes[n].depth != model.horizon)
            rep.errors.push_back({id, "per-leaf utility override must target a depth-T leaf"});
        if (!(adj.weight > 0.0))
            rep.errors.push_back({id, "leaf utility weight must be positive"});
        if (adj.shift < 0.0)
            rep.errors.push_back({id, "leaf utility shift must be non-negative"});
    }
}

}  // namespace

ValidationReport validate_model(const MarketModel& model) {
    ValidationReport rep;
    const int n = static_cast<int>(model.nodes.size());

    if (model.horizon < 1) rep.errors.push_back({"", "horizon must be >= 1"});
    if (model.asset_count < 1) rep.errors.push_back({"", "asset_count must be >= 1"});
    if (model.price_floor < 0.0) rep.errors.push_back({"", "price_floor must be >= 0"});
    if (n == 0) {
        rep.errors.push_back({"", "model has no nodes"});
        return rep;
    }

    // Tree shape: one root at depth 0, consistent parent/child links, no
    // depth gaps, leaves exactly at depth T.
    int roots = 0;
    for (int i = 0; i < n; ++i) {
        const Node& nd = model.nodes[i];
        if (nd.parent < 0) {
            ++roots;
            if (nd.depth != 0)
                rep.errors.push_back({nd.id, "root must have depth 0"});
        } else if (nd.parent >= n) {
            rep.errors.push_back({nd.id, "orphan node: parent reference out of range"});
        } else {
            const Node& p = model.nodes[nd.parent];
            if (nd.depth != p.depth + 1)
                rep.errors.push_back({nd.id, "depth gap: depth must be parent depth + 1"});
            if (std::find(p.children.begin(), p.children.end(), i) == p.children.end())
                rep.errors.push_back({nd.id, "orphan node: missing from parent's child list"});
        }
        if (nd.depth < model.horizon && nd.children.empty())
            rep.errors.push_back({nd.id, "internal node must have at least one child"});
        if (nd.depth == model.horizon && !nd.children.empty())
            rep.errors.push_back({nd.id, "node at depth T cannot have children"});
        if (nd.depth > model.horizon)
            rep.errors.push_back({nd.id, "node depth exceeds horizon"});

        if (static_cast<int>(nd.prices.size()) != model.asset_count) {
            rep.errors.push_back({nd.id, "price vector length != asset_count"});
        } else {
            for (double s : nd.prices) {
                if (!std::isfinite(s))
                    rep.errors.push_back({nd.id, "price must be finite"});
                else if (s < -model.price_floor)
                    rep.errors.push_back({nd.id, "price below -price_floor"});
            }
        }
    }
    if (roots != 1)
        rep.errors.push_back({"", roots == 0 ? "no root node" : "multiple root nodes"});

    // Duplicate node ids break file round-trips.
    {
        std::set<std::string> seen;
        for (const Node& nd : model.nodes)
            if (!seen.insert(nd.id).second)
                rep.errors.push_back({nd.id, "duplicate node id"});
    }

    if (model.priors.size() != model.nodes.size()) {
        rep.errors.push_back({"", "priors array length != node count"});
        check_utility(model, rep);
        return rep;
    }

    for (int i = 0; i < n; ++i) {
        const Node& nd = model.nodes[i];
        const PriorPolytope& pp = model.priors[i];
        if (nd.children.empty()) {
            if (!pp.vertices.empty())
                rep.errors.push_back({nd.id, "leaf carries a prior polytope"});
            continue;
        }
        if (pp.vertices.empty()) {
            rep.errors.push_back({nd.id, "internal node without prior polytope"});
            continue;
        }
        for (const Vec& v : pp.vertices) {
            if (v.size() != nd.children.size()) {
                rep.errors.push_back({nd.id, "vertex length != number of children"});
                continue;
            }
            double sum = 0.0;
            bool ok = true;
            for (double p : v) {
                if (p < -kProbTol) {
                    rep.errors.push_back({nd.id, "vertex has a negative entry"});
                    ok = false;
                    break;
                }
                sum += std::max(p, 0.0);
            }
            if (ok && std::fabs(sum - 1.0) > kProbTol)
                rep.errors.push_back({nd.id, "vertex not a probability vector"});
        }
        for (std::size_t a = 0; a + 1 < pp.vertices.size(); ++a)
            for (std::size_t b = a + 1; b < pp.vertices.size(); ++b)
                if (pp.vertices[a] == pp.vertices[b]) {
                    rep.warnings.push_back({nd.id, "duplicate polytope vertex"});
                    b = pp.vertices.size();
                }
    }

    check_utility(model, rep);
    return rep;
}

NonPolarMask nonpolar_mask(const MarketModel& model) {
    const int n = static_cast<int>(model.nodes.size());
    NonPolarMask mask;
    mask.nonpolar.assign(n, 0);
    mask.max_edge_prob.assign(n, 0.0);
    if (model.root < 0) return mask;
    mask.nonpolar[model.root] = 1;
    mask.max_edge_prob[model.root] = 1.0;

    // Children appear after their parent in depth order; walk depths 0..T-1.
    for (int depth = 0; depth < model.horizon; ++depth) {
        for (int i = 0; i < n; ++i) {
            const Node& nd = model.nodes[i];
            if (nd.depth != depth || nd.children.empty()) continue;
            const PriorPolytope& pp = model.priors[i];
            for (std::size_t c = 0; c < nd.children.size(); ++c) {
                double best = 0.0;
                for (const Vec& v : pp.vertices)
                    if (c < v.size()) best = std::max(best, v[c]);
                int child = nd.children[c];
                mask.max_edge_prob[child] = best;
                mask.nonpolar[child] = (mask.nonpolar[i] && best > 0.0) ? 1 : 0;
            }
        }
    }
    return mask;
}

std::vector<std::pair<int, Vec>> delta_s(const MarketModel& model, int node) {
    if (model.is_leaf(node))
        throw PreconditionError("delta_s: node '" + model.nodes[node].id + "' is a leaf");
    std::vector<std::pair<int, Vec>> out;
    out.reserve(model.nodes[node].children.size());
    for (int c : model.nodes[node].children) {
        Vec d(model.nodes[c].prices);
        for (int i = 0; i < model.asset_count; ++i) d[i] -= model.nodes[node].prices[i];
        out.emplace_back(c, std::move(d));
    }
    return out;
}

}  // namespace robustdp
