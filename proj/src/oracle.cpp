#include "robustdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "robustdp/arbitrage.hpp"
#include "robustdp/errors.hpp"

namespace robustdp {

namespace {

const Vec& position_at(const StrategyProfile& profile, int node, const Vec& zero) {
    auto it = profile.find(node);
    return it == profile.end() ? zero : it->second;
}

enum class Sweep { WorstU, BestUPlus };

double sweep_value(const MarketModel& model, const StrategyProfile& profile,
                   int node, double wealth, Sweep kind, const Vec& zero) {
    if (model.is_leaf(node)) {
        double u = model.utility_at(node, wealth);
        if (kind == Sweep::BestUPlus) return is_ninf(u) ? 0.0 : std::max(u, 0.0);
        return u;
    }
    const Vec& h = position_at(profile, node, zero);
    const auto deltas = delta_s(model, node);
    std::vector<double> child_values(deltas.size());
    for (std::size_t j = 0; j < deltas.size(); ++j)
        child_values[j] = sweep_value(model, profile, deltas[j].first,
                                      wealth + dot(h, deltas[j].second), kind, zero);
    double acc = kind == Sweep::WorstU ? pos_inf : neg_inf;
    for (const Vec& v : model.priors[node].vertices) {
        double e = weighted_value(v, child_values);
        acc = kind == Sweep::WorstU ? std::min(acc, e) : std::max(acc, e);
    }
    return acc;
}

}  // namespace

double fixed_strategy_worst_case(const MarketModel& model,
                                 const StrategyProfile& profile, double x0) {
    Vec zero(static_cast<std::size_t>(model.asset_count), 0.0);
    return sweep_value(model, profile, model.root, x0, Sweep::WorstU, zero);
}

double fixed_strategy_best_uplus(const MarketModel& model,
                                 const StrategyProfile& profile, double x0) {
    Vec zero(static_cast<std::size_t>(model.asset_count), 0.0);
    return sweep_value(model, profile, model.root, x0, Sweep::BestUPlus, zero);
}

double fixed_strategy_expectation(const MarketModel& model,
                                  const StrategyProfile& profile, double x0,
                                  const std::map<int, Vec>& kernels) {
    Vec zero(static_cast<std::size_t>(model.asset_count), 0.0);
    std::function<double(int, double)> walk = [&](int node, double wealth) {
        if (model.is_leaf(node)) return model.utility_at(node, wealth);
        auto it = kernels.find(node);
        if (it == kernels.end())
            throw PreconditionError("fixed_strategy_expectation: missing kernel at node " +
                                    model.nodes[node].id);
        const Vec& h = position_at(profile, node, zero);
        const auto deltas = delta_s(model, node);
        std::vector<double> child_values(deltas.size());
        for (std::size_t j = 0; j < deltas.size(); ++j) {
            if (it->second[j] <= 0.0) { child_values[j] = 0.0; continue; }
            child_values[j] =
                walk(deltas[j].first, wealth + dot(h, deltas[j].second));
        }
        return weighted_value(it->second, child_values);
    };
    return walk(model.root, x0);
}

namespace {

struct SearchAxis {
    int node;
    std::size_t coord;  // index into the node's basis
    double radius;
};

struct SearchSpace {
    std::vector<int> nodes;                    // non-polar internal nodes
    std::vector<NodeGeometry> geometry;        // aligned with nodes
    std::vector<SearchAxis> axes;
};

SearchSpace build_space(const MarketModel& model, double x0) {
    NonPolarMask mask = nonpolar_mask(model);
    NAReport report = check_na_global(model);
    if (!report.na_qT)
        throw PreconditionError("brute_force_value: the search box needs a margin, "
                                "but no-arbitrage fails");

    // reachable-wealth bound per depth, same product as the DP grid
    std::vector<double> bound(static_cast<std::size_t>(model.horizon) + 1, x0);
    for (int t = 1; t <= model.horizon; ++t) {
        double factor = 1.0;
        for (const NodeNARecord& rec : report.nodes) {
            if (model.nodes[rec.node].depth != t - 1) continue;
            double dmax = 0.0;
            for (const Vec& y : rec.geometry.support_points)
                dmax = std::max(dmax, norm2(y));
            factor = std::max(factor, 1.0 + dmax / rec.verdict.alpha);
        }
        bound[t] = bound[t - 1] * factor;
    }

    SearchSpace space;
    for (const NodeNARecord& rec : report.nodes) {
        space.nodes.push_back(rec.node);
        space.geometry.push_back(rec.geometry);
        double radius =
            bound[static_cast<std::size_t>(model.nodes[rec.node].depth)] /
            rec.verdict.alpha;
        for (std::size_t c = 0; c < rec.geometry.d_basis.size(); ++c)
            space.axes.push_back({rec.node, c, radius});
    }
    (void)mask;
    return space;
}

StrategyProfile profile_from_coords(const SearchSpace& space, const Vec& coords) {
    StrategyProfile profile;
    std::size_t a = 0;
    for (std::size_t ni = 0; ni < space.nodes.size(); ++ni) {
        const NodeGeometry& g = space.geometry[ni];
        if (g.d_basis.empty()) continue;
        Vec h(g.d_basis.front().size(), 0.0);
        for (std::size_t c = 0; c < g.d_basis.size(); ++c, ++a)
            axpy(coords[a], g.d_basis[c], h);
        profile[space.nodes[ni]] = std::move(h);
    }
    return profile;
}

using Scorer = std::function<double(const StrategyProfile&)>;

BruteForceResult run_search(const MarketModel& model, double x0,
                            const BruteForceSpec& spec, const Scorer& score) {
    SearchSpace space = build_space(model, x0);
    BruteForceResult result;
    Vec best_coords(space.axes.size(), 0.0);

    auto evaluate = [&](const Vec& coords) {
        if (++result.evaluations > spec.eval_cap)
            throw BudgetExceeded("strategy search refused: evaluation cap " +
                                 std::to_string(spec.eval_cap) + " exceeded");
        return score(profile_from_coords(space, coords));
    };
    auto accept = [&](const Vec& coords, double value) {
        if (value > result.value ||
            (value == result.value &&
             std::lexicographical_compare(coords.begin(), coords.end(),
                                          best_coords.begin(), best_coords.end()))) {
            result.value = value;
            best_coords = coords;
        }
    };

    if (space.axes.empty()) {
        accept({}, evaluate({}));
        result.profile = profile_from_coords(space, best_coords);
        return result;
    }

    // Exhaustive scan when the lattice is small enough.
    if (space.nodes.size() <= 3) {
        double total = 1.0;
        std::vector<long long> counts;
        for (const SearchAxis& ax : space.axes) {
            long long n =
                2 * static_cast<long long>(std::floor(ax.radius / spec.grid_step)) + 1;
            counts.push_back(n);
            total *= static_cast<double>(n);
        }
        if (total <= static_cast<double>(spec.eval_cap)) {
            std::vector<long long> idx(space.axes.size(), 0);
            Vec coords(space.axes.size());
            bool done = false;
            while (!done) {
                for (std::size_t a = 0; a < space.axes.size(); ++a)
                    coords[a] = (static_cast<double>(idx[a]) -
                                 static_cast<double>((counts[a] - 1) / 2)) *
                                spec.grid_step;
                accept(coords, evaluate(coords));
                std::size_t pos = 0;
                while (pos < idx.size()) {
                    if (++idx[pos] < counts[pos]) break;
                    idx[pos] = 0;
                    ++pos;
                }
                done = pos == idx.size();
            }
            result.profile = profile_from_coords(space, best_coords);
            return result;
        }
    }

    // Cyclic coordinate ascent with shrinking line grids and seeded restarts.
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int pts = std::max(5, spec.coarse_points);
    for (int restart = 0; restart <= spec.restarts; ++restart) {
        Vec coords(space.axes.size(), 0.0);
        if (restart > 0)
            for (std::size_t a = 0; a < coords.size(); ++a)
                coords[a] = unit(rng) * space.axes[a].radius * 0.5;
        double value = evaluate(coords);
        accept(coords, value);

        Vec window;
        for (const SearchAxis& ax : space.axes) window.push_back(ax.radius);
        for (;;) {
            for (int sweep = 0; sweep < 8; ++sweep) {
                double before = value;
                for (std::size_t a = 0; a < space.axes.size(); ++a) {
                    double center = coords[a];
                    double best_t = center;
                    for (int i = 0; i < pts; ++i) {
                        double t = center - window[a] +
                                   2.0 * window[a] * static_cast<double>(i) / (pts - 1);
                        t = std::clamp(t, -space.axes[a].radius, space.axes[a].radius);
                        coords[a] = t;
                        double v = evaluate(coords);
                        if (v > value) {
                            value = v;
                            best_t = t;
                        }
                    }
                    coords[a] = best_t;
                }
                accept(coords, value);
                if (value <= before + 1e-14) break;
            }
            double step = 0.0;
            for (std::size_t a = 0; a < window.size(); ++a)
                step = std::max(step, 2.0 * window[a] / (pts - 1));
            if (step <= spec.grid_step) break;
            for (double& w : window) w *= 0.5;
        }
    }
    result.profile = profile_from_coords(space, best_coords);
    return result;
}

}  // namespace

BruteForceResult brute_force_value(const MarketModel& model, double x0,
                                   const BruteForceSpec& spec) {
    return run_search(model, x0, spec, [&](const StrategyProfile& p) {
        return fixed_strategy_worst_case(model, p, x0);
    });
}

BruteForceResult brute_force_best_uplus(const MarketModel& model, double x0,
                                        const BruteForceSpec& spec) {
    return run_search(model, x0, spec, [&](const StrategyProfile& p) {
        return fixed_strategy_best_uplus(model, p, x0);
    });
}

}  // namespace robustdp
