#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "robustdp/arbitrage.hpp"
#include "robustdp/generator.hpp"
#include "robustdp/market_model.hpp"

namespace fixtures {

using namespace robustdp;

/// One-period binomial: S0=1, S1 in {2, 0.5}, up-probability in {0.4, 0.6},
/// log utility. Robust value at x0=1 is 0.4 ln 1.2 + 0.6 ln 0.9 with h* = 0.2.
inline MarketModel bin1() {
    TreeGenSpec spec;
    spec.periods = 1;
    return generate_tree(spec);
}

/// Two proportional periods of bin1; log separability doubles the value.
inline MarketModel bin2() {
    TreeGenSpec spec;
    spec.periods = 2;
    return generate_tree(spec);
}

inline MarketModel bin1_single(double p) {
    TreeGenSpec spec;
    spec.periods = 1;
    spec.p_lo = spec.p_hi = p;
    return generate_tree(spec);
}

/// bin1 plus the degenerate vertex (1,0): the quasi-sure support stays
/// two-sided but that vertex alone admits the one-sided bet h=1.
inline MarketModel bin1_extra_vertex() {
    MarketModel m = bin1();
    m.priors[static_cast<std::size_t>(m.root)].vertices.push_back({1.0, 0.0});
    return m;
}

/// Constant-price tree: every increment is zero.
inline MarketModel flat_tree(int periods = 1) {
    TreeGenSpec spec;
    spec.periods = periods;
    spec.up = 1.0;
    spec.down = 1.0;
    return generate_tree(spec);
}

/// One-sided instance: S1 in {2, 1} from S0=1, so the support is {+1, 0} and
/// h = 1 is a free bet.
inline MarketModel one_sided() {
    TreeGenSpec spec;
    spec.periods = 1;
    spec.up = 2.0;
    spec.down = 1.0;
    return generate_tree(spec);
}

inline double frozen_bin1_value() { return 0.0097123133228860792; }
inline double frozen_bin2_value() { return 2.0 * frozen_bin1_value(); }
inline double frozen_kelly_value() { return 0.05889151782819176; }

/// Hand-built two-asset one-period model from explicit increments.
inline MarketModel two_asset_one_period(const std::vector<Vec>& deltas,
                                        const std::vector<Vec>& vertices,
                                        UtilityFamily family = UtilityFamily::Log) {
    MarketModel m;
    m.horizon = 1;
    m.asset_count = 2;
    m.price_floor = 0.0;
    m.utility.family = family;
    m.nodes.push_back({"0", -1, 0, {2.0, 2.0}, {}});
    m.root = 0;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        Node leaf;
        leaf.id = "c" + std::to_string(j);
        leaf.parent = 0;
        leaf.depth = 1;
        leaf.prices = {2.0 + deltas[j][0], 2.0 + deltas[j][1]};
        m.nodes[0].children.push_back(static_cast<int>(m.nodes.size()));
        m.nodes.push_back(std::move(leaf));
    }
    m.priors.resize(m.nodes.size());
    m.priors[0].vertices = vertices;
    return m;
}

struct SampleOptions {
    int max_periods = 2;
    bool allow_d2 = true;
    bool single_prior = false;
    bool smooth_only = false;  // restrict to log/power utilities
};

/// Seeded random desk-scale instance; deterministic per seed.
inline MarketModel random_instance(std::uint64_t seed, const SampleOptions& opt = {}) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    };
    auto pick = [&](int a, int b) {
        return std::uniform_int_distribution<int>(a, b)(rng);
    };

    MarketModel m;
    m.horizon = pick(1, opt.max_periods);
    m.asset_count = (opt.allow_d2 && pick(0, 1) == 1) ? 2 : 1;
    m.price_floor = 0.0;

    int fam = opt.smooth_only ? pick(0, 1) : pick(0, 2);
    if (fam == 0) m.utility.family = UtilityFamily::Log;
    else if (fam == 1) {
        m.utility.family = UtilityFamily::Power;
        m.utility.power_p = uniform(0.2, 0.9);
    } else {
        m.utility.family = UtilityFamily::PiecewiseLinear;
        double x = 0.0, u = uniform(-1.0, 0.0), s = uniform(1.0, 3.0);
        for (int i = 0; i < 4; ++i) {
            m.utility.knots.emplace_back(x, u);
            double dx = uniform(0.3, 1.5);
            x += dx;
            u += s * dx;
            s *= uniform(0.3, 0.9);
        }
    }

    Vec s0(static_cast<std::size_t>(m.asset_count), 1.0);
    m.nodes.push_back({"0", -1, 0, s0, {}});
    m.root = 0;
    std::vector<int> frontier{0};
    for (int t = 1; t <= m.horizon; ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            int kids = m.asset_count == 1 ? pick(2, 3) : pick(3, 4);
            for (int k = 0; k < kids; ++k) {
                Node child;
                child.id = m.nodes[parent].id + "abcd"[k];
                child.parent = parent;
                child.depth = t;
                for (double sp : m.nodes[parent].prices)
                    child.prices.push_back(sp * uniform(0.55, 1.7));
                int idx = static_cast<int>(m.nodes.size());
                m.nodes.push_back(std::move(child));
                m.nodes[parent].children.push_back(idx);
                next.push_back(idx);
            }
        }
        frontier = std::move(next);
    }

    m.priors.resize(m.nodes.size());
    int n_vertices = opt.single_prior ? 1 : pick(2, 3);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        if (m.nodes[i].children.empty()) continue;
        std::size_t kids = m.nodes[i].children.size();
        for (int v = 0; v < n_vertices; ++v) {
            Vec vert(kids);
            double sum = 0.0;
            for (double& p : vert) {
                p = uniform(0.05, 1.0);
                sum += p;
            }
            for (double& p : vert) p /= sum;
            m.priors[i].vertices.push_back(std::move(vert));
        }
    }

    if (!opt.single_prior && pick(0, 3) == 0) {
        for (const Node& n : m.nodes)
            if (n.depth == m.horizon && pick(0, 1) == 0)
                m.utility.per_leaf[n.id] = {uniform(0.5, 2.0), uniform(0.0, 1.0)};
    }
    return m;
}

/// First `count` seeds >= base whose instance passes the global gate.
inline std::vector<MarketModel> na_passing_instances(std::size_t count,
                                                     std::uint64_t base,
                                                     const SampleOptions& opt = {}) {
    std::vector<MarketModel> out;
    for (std::uint64_t seed = base; out.size() < count; ++seed) {
        MarketModel m = random_instance(seed, opt);
        if (!validate_model(m).valid()) continue;
        if (check_na_global(m).na_qT) out.push_back(std::move(m));
    }
    return out;
}

}  // namespace fixtures
