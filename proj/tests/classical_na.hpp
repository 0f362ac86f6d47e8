#pragma once

#include <cmath>
#include <vector>

#include "robustdp/market_model.hpp"
#include "robustdp/numeric.hpp"

namespace fixtures {

using robustdp::MarketModel;
using robustdp::Vec;

/// Textbook single-measure one-period no-arbitrage test for d <= 2, fully
/// independent of the LP route: a free bet exists iff some direction h has
/// h.y >= 0 on the whole support with a strict gain somewhere. In dimension
/// two the feasible directions form an arc whose endpoints are
/// perpendiculars of support points, so checking those candidates plus their
/// bisectors is exhaustive.
inline bool classical_na_holds(const std::vector<Vec>& support) {
    double scale = 0.0;
    for (const Vec& y : support) scale = std::max(scale, robustdp::norm2(y));
    if (scale == 0.0) return true;

    const double zero_tol = 1e-12 * scale;
    const double strict_tol = 1e-9 * scale;
    auto one_sided = [&](const Vec& h) {
        double worst = 0.0, best = 0.0;
        for (const Vec& y : support) {
            double g = robustdp::dot(h, y);
            worst = std::min(worst, g);
            best = std::max(best, g);
        }
        return worst >= -zero_tol && best > strict_tol;
    };

    if (support.front().size() == 1) {
        bool pos = false, neg = false;
        for (const Vec& y : support) {
            pos = pos || y[0] > zero_tol;
            neg = neg || y[0] < -zero_tol;
        }
        return pos == neg;  // both sides or all zero
    }

    std::vector<Vec> candidates;
    for (const Vec& y : support) {
        if (robustdp::norm2(y) <= zero_tol) continue;
        candidates.push_back({y[1], -y[0]});
        candidates.push_back({-y[1], y[0]});
        candidates.push_back(y);
        candidates.push_back({-y[0], -y[1]});
    }
    std::size_t base = candidates.size();
    for (std::size_t a = 0; a < base; ++a)
        for (std::size_t b = a + 1; b < base; ++b) {
            Vec mid{candidates[a][0] + candidates[b][0],
                    candidates[a][1] + candidates[b][1]};
            if (robustdp::norm2(mid) > zero_tol) candidates.push_back(mid);
        }
    for (const Vec& h : candidates)
        if (one_sided(h)) return false;
    return true;
}

/// Global classical verdict for a single-prior model: every charged internal
/// node must pass the one-period test on its charged support.
inline bool classical_na_global(const MarketModel& model) {
    robustdp::NonPolarMask mask = robustdp::nonpolar_mask(model);
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        int node = static_cast<int>(i);
        if (model.nodes[i].children.empty() || !mask(node)) continue;
        std::vector<Vec> support;
        for (auto& [child, d] : robustdp::delta_s(model, node))
            if (mask(child)) support.push_back(d);
        if (!classical_na_holds(support)) return false;
    }
    return true;
}

}  // namespace fixtures
