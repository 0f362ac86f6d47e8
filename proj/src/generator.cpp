#include "robustdp/generator.hpp"

#include <algorithm>
#include <random>

#include "robustdp/errors.hpp"

namespace robustdp {

MarketModel generate_tree(const TreeGenSpec& spec) {
    if (spec.periods < 1)
        throw PreconditionError("generate_tree: periods must be >= 1");
    MarketModel model;
    model.horizon = spec.periods;
    model.asset_count = 1;
    model.price_floor = spec.price_floor;
    model.utility.family = spec.family;
    model.utility.power_p = spec.power_p;

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> noise(-spec.jitter, spec.jitter);
    auto jittered = [&](double f) {
        return spec.jitter > 0.0 ? f * (1.0 + noise(rng)) : f;
    };

    struct Branch {
        char tag;
        double factor;
    };
    std::vector<Branch> branches{{'u', spec.up}};
    if (spec.mid) branches.push_back({'m', *spec.mid});
    branches.push_back({'d', spec.down});

    // Vertices: corners of the probability intervals, deduplicated.
    std::vector<Vec> vertices;
    auto push_vertex = [&](Vec v) {
        for (double p : v)
            if (p < -kProbTol) return;
        if (std::find(vertices.begin(), vertices.end(), v) == vertices.end())
            vertices.push_back(std::move(v));
    };
    if (spec.mid) {
        for (double pu : {spec.p_lo, spec.p_hi})
            for (double pm : {spec.pm_lo, spec.pm_hi})
                push_vertex({pu, pm, 1.0 - pu - pm});
    } else {
        push_vertex({spec.p_lo, 1.0 - spec.p_lo});
        push_vertex({spec.p_hi, 1.0 - spec.p_hi});
    }
    if (vertices.empty())
        throw PreconditionError("generate_tree: probability intervals are empty");

    model.nodes.push_back({"0", -1, 0, {spec.s0}, {}});
    model.root = 0;
    std::vector<int> frontier{0};
    for (int t = 1; t <= spec.periods; ++t) {
        std::vector<int> next;
        for (int parent : frontier) {
            for (const Branch& br : branches) {
                Node child;
                child.id = model.nodes[parent].id + br.tag;
                child.parent = parent;
                child.depth = t;
                child.prices = {model.nodes[parent].prices[0] * jittered(br.factor)};
                int idx = static_cast<int>(model.nodes.size());
                model.nodes.push_back(std::move(child));
                model.nodes[parent].children.push_back(idx);
                next.push_back(idx);
            }
        }
        frontier = std::move(next);
    }

    model.priors.resize(model.nodes.size());
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (!model.nodes[i].children.empty()) model.priors[i].vertices = vertices;
    return model;
}

}  // namespace robustdp
