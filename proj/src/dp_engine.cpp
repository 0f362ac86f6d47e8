#include "robustdp/dp_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <thread>

#include "robustdp/errors.hpp"

namespace robustdp {

namespace {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, hw);
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<int> internal_nonpolar_at_depth(const MarketModel& model,
                                            const NonPolarMask& mask, int depth) {
    std::vector<int> out;
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (model.nodes[i].depth == depth && model.is_internal(static_cast<int>(i)) &&
            mask(static_cast<int>(i)))
            out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace

std::vector<ValueFn> continuation_functions(const MarketModel& model,
                                            const NonPolarMask& mask,
                                            const NAReport& na_report,
                                            const ValueSurface& surface, int node,
                                            int exact_depth,
                                            const SaddleOptions& saddle_opts) {
    const NodeNARecord* rec = na_report.find(node);
    if (!rec)
        throw PreconditionError("no arbitrage record for node " + model.nodes[node].id);
    std::vector<ValueFn> fns;
    fns.reserve(rec->geometry.support_children.size());
    for (int child : rec->geometry.support_children) {
        if (model.is_leaf(child)) {
            fns.push_back(
                [&model, child](double w) { return model.utility_at(child, w); });
        } else if (exact_depth > 0) {
            fns.push_back([&model, &mask, &na_report, &surface, child, exact_depth,
                           saddle_opts](double w) {
                const NodeNARecord* crec = na_report.find(child);
                OnePeriodProblem sub = make_one_period_problem(
                    model, mask, crec->geometry, crec->verdict.alpha, child, w,
                    continuation_functions(model, mask, na_report, surface, child,
                                           exact_depth - 1, saddle_opts));
                return solve_one_period(sub, saddle_opts).value;
            });
        } else {
            const ConcaveValueTable* table = &surface.at(child);
            if (table->empty())
                throw PreconditionError("child table not built for node " +
                                        model.nodes[child].id);
            fns.push_back([table](double w) { return (*table)(w); });
        }
    }
    return fns;
}

WealthGrid build_grid(const MarketModel& model, double x0,
                      const NAReport& na_report, const GridSpec& spec) {
    if (!na_report.na_qT)
        throw PreconditionError("build_grid requires the no-arbitrage gate to pass");
    if (x0 < 0.0) throw PreconditionError("build_grid: x0 must be >= 0");

    NonPolarMask mask = nonpolar_mask(model);
    WealthGrid grid;
    grid.bounds.assign(static_cast<std::size_t>(model.horizon) + 1, 0.0);
    grid.bounds[0] = spec.safety * x0;
    for (int t = 1; t <= model.horizon; ++t) {
        double factor = 1.0;
        for (int node : internal_nonpolar_at_depth(model, mask, t - 1)) {
            double alpha = na_report.alpha_at(node);
            if (!(alpha > 0.0))
                throw PreconditionError("build_grid: zero margin at node " +
                                        model.nodes[node].id);
            double dmax = 0.0;
            for (auto& [child, d] : delta_s(model, node))
                if (mask(child)) dmax = std::max(dmax, norm2(d));
            factor = std::max(factor, 1.0 + dmax / alpha);
        }
        grid.bounds[t] = grid.bounds[t - 1] * factor;
    }

    grid.knots.resize(grid.bounds.size());
    if (x0 == 0.0) {
        // reachable wealth is 0; keep a token positive tail so tables have shape
        Vec base{0.0};
        for (int j = spec.geometric_levels; j >= 0; --j)
            base.push_back(std::ldexp(1.0, -j));
        for (auto& k : grid.knots) k = base;
        grid.floor = std::ldexp(1.0, -spec.geometric_levels);
        return grid;
    }

    grid.floor = grid.bounds[0] * std::ldexp(1.0, -spec.geometric_levels);
    for (std::size_t t = 0; t < grid.bounds.size(); ++t) {
        const double top = grid.bounds[t];
        Vec ks{0.0, grid.floor};
        for (double v = top / 2.0; v > grid.floor * (1.0 + 1e-12); v /= 2.0)
            ks.push_back(v);
        int linear = std::max(2, spec.knot_count - static_cast<int>(ks.size()));
        for (int i = 0; i < linear; ++i)
            ks.push_back(top * static_cast<double>(i + 1) / linear);
        std::sort(ks.begin(), ks.end());
        Vec dedup;
        for (double v : ks)
            if (dedup.empty() || v > dedup.back() + 1e-12 * top) dedup.push_back(v);
        grid.knots[t] = std::move(dedup);
    }
    return grid;
}

ValueSurface backward_induct(const MarketModel& model, const NonPolarMask& mask,
                             const NAReport& na_report, const WealthGrid& grid,
                             const DpOptions& opts) {
    if (!na_report.na_qT)
        throw PreconditionError("backward_induct requires the no-arbitrage gate to pass");
    ValueSurface surface;
    surface.tables.resize(model.nodes.size());

    const Vec& leaf_knots = grid.knots[static_cast<std::size_t>(model.horizon)];
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        int node = static_cast<int>(i);
        if (!model.is_leaf(node) || !mask(node)) continue;
        Vec values(leaf_knots.size());
        for (std::size_t k = 0; k < leaf_knots.size(); ++k)
            values[k] = model.utility_at(node, leaf_knots[k]);
        surface.tables[i] = ConcaveValueTable(leaf_knots, std::move(values));
    }

    for (int t = model.horizon - 1; t >= 0; --t) {
        auto nodes = internal_nonpolar_at_depth(model, mask, t);
        const Vec& knots = grid.knots[static_cast<std::size_t>(t)];
        std::vector<Vec> values(nodes.size(), Vec(knots.size(), neg_inf));

        parallel_for(nodes.size() * knots.size(), opts.threads, [&](std::size_t task) {
            std::size_t ni = task / knots.size();
            std::size_t ki = task % knots.size();
            int node = nodes[ni];
            const NodeNARecord* rec = na_report.find(node);
            OnePeriodProblem problem = make_one_period_problem(
                model, mask, rec->geometry, rec->verdict.alpha, node, knots[ki],
                continuation_functions(model, mask, na_report, surface, node, 0,
                                       opts.saddle));
            values[ni][ki] = solve_one_period(problem, opts.saddle).value;
        });

        for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
            ConcaveValueTable table(knots, std::move(values[ni]));
            std::string why;
            if (!table.check_monotone(opts.saddle.value_tol, &why) ||
                !table.check_concave(opts.saddle.value_tol, &why))
                throw PreconditionError("value table shape violation at node " +
                                        model.nodes[nodes[ni]].id + ": " + why);
            surface.tables[static_cast<std::size_t>(nodes[ni])] = std::move(table);
        }
    }
    return surface;
}

const PolicyRow* PolicyTrace::find(int node) const {
    for (const PolicyRow& r : rows)
        if (r.node == node) return &r;
    return nullptr;
}

PolicyTrace extract_policy(const MarketModel& model, const NonPolarMask& mask,
                           const NAReport& na_report, const ValueSurface& surface,
                           double x0, const DpOptions& opts) {
    if (x0 < 0.0) throw PreconditionError("extract_policy: x0 must be >= 0");
    PolicyTrace trace;
    std::deque<std::pair<int, double>> queue{{model.root, x0}};
    while (!queue.empty()) {
        auto [node, wealth] = queue.front();
        queue.pop_front();
        if (wealth < -1e-10)
            throw PreconditionError("extract_policy: wealth " + std::to_string(wealth) +
                                    " below floor at node " + model.nodes[node].id);
        PolicyRow row;
        row.node = node;
        row.depth = model.nodes[node].depth;
        row.wealth = wealth;
        if (model.is_leaf(node)) {
            row.continuation = model.utility_at(node, std::max(wealth, 0.0));
            trace.rows.push_back(std::move(row));
            continue;
        }
        const NodeNARecord* rec = na_report.find(node);
        if (!rec || !rec->verdict.holds)
            throw PreconditionError("extract_policy: no margin available at node " +
                                    model.nodes[node].id);
        OnePeriodProblem problem = make_one_period_problem(
            model, mask, rec->geometry, rec->verdict.alpha, node,
            std::max(wealth, 0.0), child_values(model, rec->geometry, surface));
        SaddleSolution sol = solve_one_period(problem, opts.saddle);
        row.h = project_to_D(rec->geometry, sol.h_opt);
        row.worst_vertex = sol.worst_vertex;
        row.continuation = sol.value;
        for (std::size_t j = 0; j < rec->geometry.support_children.size(); ++j) {
            int child = rec->geometry.support_children[j];
            queue.emplace_back(child,
                               wealth + dot(row.h, rec->geometry.support_points[j]));
        }
        trace.rows.push_back(std::move(row));
    }
    trace.root_value = trace.rows.front().continuation;
    return trace;
}

bool robust_wealth_floor(const MarketModel& model, const PolicyTrace& trace) {
    (void)model;
    for (const PolicyRow& r : trace.rows)
        if (r.wealth < -1e-10) return false;
    return true;
}

DiagnosticsTable compute_J(const MarketModel& model, const Vec& r_set) {
    for (double r : r_set)
        if (!(r > 0.0))
            throw PreconditionError("compute_J: every probe r must be positive");
    DiagnosticsTable table;
    table.r_values = r_set;
    table.j.assign(model.nodes.size(), Vec(r_set.size(), 0.0));

    for (int t = model.horizon; t >= 0; --t) {
        for (std::size_t i = 0; i < model.nodes.size(); ++i) {
            int node = static_cast<int>(i);
            if (model.nodes[i].depth != t) continue;
            for (std::size_t ri = 0; ri < r_set.size(); ++ri) {
                if (model.is_leaf(node)) {
                    double u = model.utility_at(node, r_set[ri]);
                    table.j[i][ri] = is_ninf(u) ? pos_inf : std::max(0.0, -u);
                    continue;
                }
                std::vector<double> child_j;
                child_j.reserve(model.nodes[i].children.size());
                for (int c : model.nodes[i].children)
                    child_j.push_back(table.j[static_cast<std::size_t>(c)][ri]);
                double worst = 0.0;
                for (const Vec& v : model.priors[i].vertices)
                    worst = std::max(worst, weighted_value(v, child_j));
                table.j[i][ri] = worst;
            }
        }
    }
    for (std::size_t ri = 0; ri < r_set.size(); ++ri)
        if (is_pinf(table.j[static_cast<std::size_t>(model.root)][ri]))
            table.uminus_ok = false;
    return table;
}

}  // namespace robustdp
