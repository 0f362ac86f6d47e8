#include "robustdp/arbitrage.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "robustdp/errors.hpp"
#include "robustdp/simplex.hpp"

namespace robustdp {

namespace {

/// Modified Gram-Schmidt with a scale-aware drop tolerance.
std::vector<Vec> orthonormal_basis(const std::vector<Vec>& points, double scale) {
    std::vector<Vec> basis;
    const double tol = kSpanTol * std::max(scale, 1e-300);
    for (const Vec& p : points) {
        Vec r = p;
        for (const Vec& b : basis) axpy(-dot(r, b), b, r);
        // second pass for orthogonality at nearly dependent inputs
        for (const Vec& b : basis) axpy(-dot(r, b), b, r);
        double n = norm2(r);
        if (n > tol) basis.push_back(scaled(r, 1.0 / n));
    }
    return basis;
}

double max_norm(const std::vector<Vec>& points) {
    double m = 0.0;
    for (const Vec& p : points) m = std::max(m, norm2(p));
    return m;
}

struct SupportProblem {
    std::vector<Vec> points;    // price increments
    std::vector<Vec> measures;  // probability of each point, one row per measure
};

/// NA verdict on a bare support set; certificate in the second member.
std::pair<bool, Vec> na_verdict(const std::vector<Vec>& points, int dim_ambient) {
    const double scale = max_norm(points);
    if (scale == 0.0) return {true, {}};  // support is {0}: no one-sided bet

    std::vector<Vec> pts;
    pts.reserve(points.size());
    for (const Vec& p : points) pts.push_back(scaled(p, 1.0 / scale));

    // Variables: h = u - w (u, w >= 0), slacks s in [0,1].
    const std::size_t m = pts.size();
    const std::size_t d = static_cast<std::size_t>(dim_ambient);
    const std::size_t nvar = 2 * d + m;
    std::vector<Vec> A;
    Vec b, c(nvar, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        Vec row(nvar, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            row[i] = -pts[j][i];
            row[d + i] = pts[j][i];
        }
        row[2 * d + j] = 1.0;
        A.push_back(std::move(row));  // s_j - h.y_j <= 0
        b.push_back(0.0);
        c[2 * d + j] = 1.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
        Vec row(nvar, 0.0);
        row[2 * d + j] = 1.0;
        A.push_back(std::move(row));  // s_j <= 1
        b.push_back(1.0);
    }

    LpResult lp = simplex_max(A, b, c);
    // A one-sided direction can always be scaled to push some slack to 1, so
    // the two verdict regimes are separated by a full unit.
    if (lp.value < 0.5) return {true, {}};

    Vec h(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) h[i] = lp.x[i] - lp.x[d + i];
    double hmax = 0.0;
    for (double v : h) hmax = std::max(hmax, std::fabs(v));
    if (hmax == 0.0) throw LpFailure("na_verdict: failing LP returned a null direction");
    for (double& v : h) {
        v /= hmax;
        if (std::fabs(v) < 1e-12) v = 0.0;
    }

    // Independent recheck of the certificate on the scaled support.
    double best = 0.0;
    for (const Vec& y : pts) {
        double g = dot(h, y);
        if (g < -kSpanTol) throw LpFailure("na_verdict: certificate recheck failed");
        best = std::max(best, g);
    }
    if (best <= kSpanTol) throw LpFailure("na_verdict: certificate is not one-sided");
    return {false, h};
}

/// Probability, under measure p, of losing at least `threshold` in direction h
/// (with the 1e-12 comparison slack shared by both margin flavours).
double tail_mass(const Vec& h, const std::vector<Vec>& points, const Vec& p,
                 double threshold) {
    double mass = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
        if (dot(h, points[j]) <= -threshold + kMarginTol) mass += p[j];
    return mass;
}

/// True when direction h still defeats the margin test at level n: every
/// measure keeps the 1/n-loss probability at or below 1/n.
bool survives_level(const Vec& h, const SupportProblem& sp, long long n) {
    const double inv = 1.0 / static_cast<double>(n);
    for (const Vec& p : sp.measures)
        if (tail_mass(h, sp.points, p, inv) > inv + kMarginTol) return false;
    return true;
}

/// Largest n at which h survives. Survival is monotone (losing mass at level
/// n+1 dominates level n), so binary search applies. Returns -1 when h
/// survives every level, which signals a one-sided direction.
long long last_survival_level(const Vec& h, const SupportProblem& sp) {
    double worst_gain = 0.0;  // most negative h.y
    for (const Vec& y : sp.points) worst_gain = std::min(worst_gain, dot(h, y));
    double loss_prob = 0.0;
    for (const Vec& p : sp.measures)
        loss_prob = std::max(loss_prob, tail_mass(h, sp.points, p, -worst_gain));
    if (worst_gain >= -kMarginTol || loss_prob <= kMarginTol) return -1;

    long long hi = static_cast<long long>(
                       std::ceil(std::max(1.0 / (-worst_gain), 1.0 / loss_prob))) +
                   2;
    if (survives_level(h, sp, hi))
        throw PreconditionError("margin search did not terminate");
    long long lo = 1;  // level 1 always survives: tail mass cannot exceed 1
    while (lo + 1 < hi) {
        long long mid = lo + (hi - lo) / 2;
        if (survives_level(h, sp, mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::vector<Vec> sphere_directions(const std::vector<Vec>& basis, int count,
                                   std::uint64_t seed) {
    const std::size_t k = basis.size();
    const std::size_t d = basis.front().size();
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<std::size_t>(count));
    if (k == 2) {
        for (int i = 0; i < count; ++i) {
            double a = 2.0 * M_PI * (static_cast<double>(i) + 0.5) / count;
            Vec h(d, 0.0);
            axpy(std::cos(a), basis[0], h);
            axpy(std::sin(a), basis[1], h);
            dirs.push_back(std::move(h));
        }
        return dirs;
    }
    if (k == 3) {
        // Fibonacci lattice on S^2, mapped through the basis.
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int i = 0; i < count; ++i) {
            double z = 1.0 - 2.0 * (i + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double a = 2.0 * M_PI * i / golden;
            Vec h(d, 0.0);
            axpy(r * std::cos(a), basis[0], h);
            axpy(r * std::sin(a), basis[1], h);
            axpy(z, basis[2], h);
            dirs.push_back(std::move(h));
        }
        return dirs;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
        Vec coeff(k);
        double n2 = 0.0;
        do {
            for (std::size_t j = 0; j < k; ++j) coeff[j] = gauss(rng);
            n2 = std::sqrt(dot(coeff, coeff));
        } while (n2 < 1e-8);
        Vec h(d, 0.0);
        for (std::size_t j = 0; j < k; ++j) axpy(coeff[j] / n2, basis[j], h);
        dirs.push_back(std::move(h));
    }
    return dirs;
}

/// n0 over a candidate direction set: one past the deepest survival level.
long long margin_n0(const std::vector<Vec>& candidates, const SupportProblem& sp) {
    long long deepest = 0;
    for (const Vec& h : candidates) {
        long long n = last_survival_level(h, sp);
        if (n < 0)
            throw PreconditionError(
                "compute_alpha: one-sided direction found; no-arbitrage is violated");
        deepest = std::max(deepest, n);
    }
    return deepest + 1;
}

/// Shared margin computation on a bare support set.
std::pair<long long, bool> alpha_n0(const SupportProblem& sp,
                                    const std::vector<Vec>& basis,
                                    const SphereSpec& sphere) {
    if (basis.empty()) return {1, true};  // D = {0}
    if (basis.size() == 1) {
        std::vector<Vec> cands{basis[0], scaled(basis[0], -1.0)};
        return {margin_n0(cands, sp), true};
    }
    auto dirs = sphere_directions(basis, sphere.directions, sphere.seed);
    return {margin_n0(dirs, sp), false};
}

SupportProblem support_problem(const MarketModel& model, const NonPolarMask& mask,
                               int node) {
    SupportProblem sp;
    const Node& nd = model.nodes[node];
    auto deltas = delta_s(model, node);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < deltas.size(); ++c)
        if (mask(deltas[c].first)) {
            kept.push_back(c);
            sp.points.push_back(deltas[c].second);
        }
    for (const Vec& v : model.priors[node].vertices) {
        Vec row;
        row.reserve(kept.size());
        for (std::size_t c : kept) row.push_back(std::max(v[c], 0.0));
        sp.measures.push_back(std::move(row));
    }
    if (sp.points.empty())
        throw PreconditionError("node '" + nd.id + "' has no non-polar children");
    return sp;
}

}  // namespace

NodeGeometry node_geometry(const MarketModel& model, const NonPolarMask& mask,
                           int node) {
    if (model.is_leaf(node))
        throw PreconditionError("node_geometry: node is a leaf");
    if (!mask(node))
        throw PreconditionError("node_geometry: node is polar");

    NodeGeometry g;
    auto deltas = delta_s(model, node);
    for (auto& [child, d] : deltas) {
        if (!mask(child)) continue;
        g.support_children.push_back(child);
        g.support_points.push_back(d);
    }
    const std::size_t m = g.support_points.size();
    const std::size_t dim_ambient = static_cast<std::size_t>(model.asset_count);
    g.barycenter.assign(dim_ambient, 0.0);
    for (const Vec& p : g.support_points) axpy(1.0 / m, p, g.barycenter);

    double scale = max_norm(g.support_points);
    auto span_basis = orthonormal_basis(g.support_points, scale);
    std::vector<Vec> centered;
    centered.reserve(m);
    for (const Vec& p : g.support_points) {
        Vec c = p;
        axpy(-1.0, g.barycenter, c);
        centered.push_back(std::move(c));
    }
    auto dir_basis = orthonormal_basis(centered, scale);

    g.zero_in_affine_hull = span_basis.size() == dir_basis.size();
    g.d_basis = g.zero_in_affine_hull ? std::move(span_basis) : std::move(dir_basis);
    g.dim = static_cast<int>(g.d_basis.size());
    return g;
}

Vec project_to_D(const NodeGeometry& geometry, const Vec& h) {
    Vec out(h.size(), 0.0);
    for (const Vec& b : geometry.d_basis) axpy(dot(h, b), b, out);
    return out;
}

NAVerdict check_na_node(const MarketModel& model, const NonPolarMask& mask,
                        int node) {
    if (model.is_leaf(node))
        throw PreconditionError("check_na_node: node is a leaf");
    if (!mask(node))
        throw PreconditionError("check_na_node: node is polar");
    SupportProblem sp = support_problem(model, mask, node);
    auto [holds, cert] = na_verdict(sp.points, model.asset_count);
    NAVerdict v;
    v.holds = holds;
    v.certificate = std::move(cert);
    return v;
}

double compute_alpha(const MarketModel& model, const NonPolarMask& mask,
                     int node, const SphereSpec& sphere) {
    SupportProblem sp = support_problem(model, mask, node);
    auto [holds, cert] = na_verdict(sp.points, model.asset_count);
    if (!holds)
        throw PreconditionError("compute_alpha: no-arbitrage fails at node '" +
                                model.nodes[node].id + "'");
    NodeGeometry g = node_geometry(model, mask, node);
    auto [n0, exact] = alpha_n0(sp, g.d_basis, sphere);
    return exact ? 1.0 / static_cast<double>(n0)
                 : 1.0 / static_cast<double>(n0 + 1);
}

const NodeNARecord* NAReport::find(int node) const {
    for (const NodeNARecord& r : nodes)
        if (r.node == node) return &r;
    return nullptr;
}

double NAReport::alpha_at(int node) const {
    const NodeNARecord* r = find(node);
    return (r && r->verdict.holds) ? r->verdict.alpha : 0.0;
}

NAReport check_na_global(const MarketModel& model, const SphereSpec& sphere) {
    NAReport rep;
    rep.na_qT = true;
    NonPolarMask mask = nonpolar_mask(model);
    for (std::size_t n = 0; n < model.nodes.size(); ++n) {
        int node = static_cast<int>(n);
        if (model.is_leaf(node) || !mask(node)) continue;
        NodeNARecord rec;
        rec.node = node;
        rec.geometry = node_geometry(model, mask, node);
        SupportProblem sp = support_problem(model, mask, node);
        auto [holds, cert] = na_verdict(sp.points, model.asset_count);
        rec.verdict.holds = holds;
        rec.verdict.certificate = std::move(cert);
        if (holds) {
            auto [n0, exact] = alpha_n0(sp, rec.geometry.d_basis, sphere);
            rec.verdict.n0 = static_cast<int>(n0);
            rec.verdict.alpha_exact = exact;
            rec.verdict.alpha = exact ? 1.0 / static_cast<double>(n0)
                                      : 1.0 / static_cast<double>(n0 + 1);
        } else {
            rep.na_qT = false;
        }
        rep.nodes.push_back(std::move(rec));
    }
    rep.sna = check_sna(model, sphere);
    rep.margin_note =
        "tail comparisons use a 1e-12 slack; the per-prior margin is quoted "
        "with a non-strict inequality while the global one is strict";
    return rep;
}

SnaReport check_sna(const MarketModel& model, const SphereSpec& sphere) {
    SnaReport rep;
    rep.sna = true;
    NonPolarMask mask = nonpolar_mask(model);
    for (std::size_t n = 0; n < model.nodes.size(); ++n) {
        int node = static_cast<int>(n);
        if (model.is_leaf(node) || !mask(node)) continue;
        auto deltas = delta_s(model, node);
        const PriorPolytope& pp = model.priors[node];
        for (std::size_t vi = 0; vi < pp.vertices.size(); ++vi) {
            const Vec& vert = pp.vertices[vi];
            SupportProblem sp;
            Vec probs;
            for (std::size_t c = 0; c < deltas.size(); ++c) {
                if (vert[c] <= 0.0) continue;
                sp.points.push_back(deltas[c].second);
                probs.push_back(vert[c]);
            }
            sp.measures.push_back(std::move(probs));
            SnaMargin margin;
            margin.node = node;
            margin.vertex = static_cast<int>(vi);
            auto [holds, cert] = na_verdict(sp.points, model.asset_count);
            margin.holds = holds;
            if (holds) {
                auto basis =
                    orthonormal_basis(sp.points, max_norm(sp.points));
                auto [n0, exact] = alpha_n0(sp, basis, sphere);
                margin.alpha = exact ? 1.0 / static_cast<double>(n0)
                                     : 1.0 / static_cast<double>(n0 + 1);
            } else {
                rep.sna = false;
            }
            rep.margins.push_back(margin);
        }
    }
    return rep;
}

}  // namespace robustdp
