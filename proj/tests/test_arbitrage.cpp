#include <random>

#include "classical_na.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "robustdp/arbitrage.hpp"
#include "robustdp/errors.hpp"
#include "robustdp/simplex.hpp"

using namespace robustdp;

namespace {

/// Straight-line enumeration of the margin level, fully independent of the
/// binary search inside compute_alpha.
int enumerate_n0_dim1(const std::vector<Vec>& support,
                      const std::vector<Vec>& measures, const Vec& e) {
    std::vector<Vec> dirs{e, scaled(e, -1.0)};
    for (int n = 1; n < 1 << 20; ++n) {
        bool any_survivor = false;
        for (const Vec& h : dirs) {
            bool ok = true;
            for (const Vec& p : measures) {
                double tail = 0.0;
                for (std::size_t j = 0; j < support.size(); ++j)
                    if (dot(h, support[j]) <= -1.0 / n + 1e-12) tail += p[j];
                if (tail > 1.0 / n + 1e-12) { ok = false; break; }
            }
            if (ok) { any_survivor = true; break; }
        }
        if (!any_survivor) return n;
    }
    return -1;
}

}  // namespace

TEST_CASE("simplex solves small inequality programs") {
    // max x+y st x <= 2, y <= 3, x + y <= 4
    LpResult r = simplex_max({{1, 0}, {0, 1}, {1, 1}}, {2, 3, 4}, {1, 1});
    CHECK(r.value == doctest::Approx(4.0));
    // degenerate rows with zero rhs stay feasible
    LpResult z = simplex_max({{1, -1}, {1, 0}}, {0, 1}, {1, 0});
    CHECK(z.value == doctest::Approx(1.0));
    CHECK_THROWS_AS(simplex_max({{1, 0}}, {-1, 0}, {1, 0}), LpFailure);
}

TEST_CASE("bin1 geometry: two scalars span one dimension") {
    MarketModel m = fixtures::bin1();
    NonPolarMask mask = nonpolar_mask(m);
    NodeGeometry g = node_geometry(m, mask, 0);
    REQUIRE(g.dim == 1);
    CHECK(g.support_points.size() == 2);
    CHECK(std::fabs(g.d_basis[0][0]) == doctest::Approx(1.0));
    CHECK(g.zero_in_affine_hull);
}

TEST_CASE("flat node has zero-dimensional geometry") {
    MarketModel m = fixtures::flat_tree();
    NonPolarMask mask = nonpolar_mask(m);
    NodeGeometry g = node_geometry(m, mask, 0);
    CHECK(g.dim == 0);
    CHECK(g.d_basis.empty());
}

TEST_CASE("collinear two-asset supports give a one-dimensional span") {
    MarketModel m = fixtures::two_asset_one_period({{1.0, 0.0}, {-1.0, 0.0}},
                                                   {{0.5, 0.5}});
    NonPolarMask mask = nonpolar_mask(m);
    NodeGeometry g = node_geometry(m, mask, 0);
    REQUIRE(g.dim == 1);
    CHECK(std::fabs(g.d_basis[0][0]) == doctest::Approx(1.0));
    CHECK(g.d_basis[0][1] == doctest::Approx(0.0));
}

TEST_CASE("projection onto the span keeps every payoff") {
    MarketModel m = fixtures::two_asset_one_period({{1.0, 0.0}, {-1.0, 0.0}},
                                                   {{0.5, 0.5}});
    NonPolarMask mask = nonpolar_mask(m);
    NodeGeometry g = node_geometry(m, mask, 0);
    Vec h{3.0, 7.0};
    Vec hp = project_to_D(g, h);
    CHECK(hp[0] == doctest::Approx(3.0));
    CHECK(hp[1] == doctest::Approx(0.0));
    for (const Vec& y : g.support_points)
        CHECK(dot(hp, y) == doctest::Approx(dot(h, y)).epsilon(1e-9));

    NodeGeometry flat = node_geometry(fixtures::flat_tree(), mask, 0);
    Vec zero = project_to_D(flat, {5.0});
    CHECK(zero[0] == 0.0);
}

TEST_CASE("property: projection is idempotent and norm non-increasing") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (std::uint64_t seed = 70; seed < 82; ++seed) {
        MarketModel m = fixtures::random_instance(seed);
        NonPolarMask mask = nonpolar_mask(m);
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            int node = static_cast<int>(i);
            if (m.nodes[i].children.empty() || !mask(node)) continue;
            NodeGeometry g = node_geometry(m, mask, node);
            Vec h(static_cast<std::size_t>(m.asset_count));
            for (double& c : h) c = u(rng);
            Vec p1 = project_to_D(g, h);
            Vec p2 = project_to_D(g, p1);
            CHECK(norm2(p1) <= norm2(h) + 1e-12);
            for (std::size_t c = 0; c < p1.size(); ++c)
                CHECK(p2[c] == doctest::Approx(p1[c]).epsilon(1e-10));
        }
    }
}

TEST_CASE("bin1 has no arbitrage; one-sided support does") {
    MarketModel m = fixtures::bin1();
    NonPolarMask mask = nonpolar_mask(m);
    CHECK(check_na_node(m, mask, 0).holds);

    MarketModel bad = fixtures::one_sided();
    NonPolarMask badmask = nonpolar_mask(bad);
    NAVerdict v = check_na_node(bad, badmask, 0);
    REQUIRE_FALSE(v.holds);
    REQUIRE(v.certificate.size() == 1);
    CHECK(v.certificate[0] == doctest::Approx(1.0));

    MarketModel flat = fixtures::flat_tree();
    CHECK(check_na_node(flat, nonpolar_mask(flat), 0).holds);
}

TEST_CASE("alpha: flat node gets 1, bin1 gets exactly 1/2") {
    MarketModel flat = fixtures::flat_tree();
    CHECK(compute_alpha(flat, nonpolar_mask(flat), 0) == 1.0);

    MarketModel m = fixtures::bin1();
    CHECK(compute_alpha(m, nonpolar_mask(m), 0) == 0.5);

    MarketModel bad = fixtures::one_sided();
    CHECK_THROWS_AS(compute_alpha(bad, nonpolar_mask(bad), 0), PreconditionError);
}

TEST_CASE("alpha matches the independent enumeration on dim<=1 nodes") {
    for (std::uint64_t seed = 100; seed < 160; ++seed) {
        MarketModel m = fixtures::random_instance(seed, {.allow_d2 = false});
        if (!validate_model(m).valid()) continue;
        NAReport rep = check_na_global(m);
        if (!rep.na_qT) continue;
        NonPolarMask mask = nonpolar_mask(m);
        for (const NodeNARecord& rec : rep.nodes) {
            if (rec.geometry.dim != 1) continue;
            std::vector<Vec> measures;
            for (const Vec& v : m.priors[static_cast<std::size_t>(rec.node)].vertices) {
                Vec row;
                for (std::size_t c = 0;
                     c < m.nodes[static_cast<std::size_t>(rec.node)].children.size(); ++c)
                    if (mask(m.nodes[static_cast<std::size_t>(rec.node)].children[c]))
                        row.push_back(v[c]);
                measures.push_back(std::move(row));
            }
            int n0 = enumerate_n0_dim1(rec.geometry.support_points, measures,
                                       rec.geometry.d_basis[0]);
            REQUIRE(n0 > 0);
            CHECK(rec.verdict.n0 == n0);
            CHECK(rec.verdict.alpha == 1.0 / n0);
        }
    }
}

TEST_CASE("margin property holds at exact-alpha nodes") {
    // For every unit direction in the span some vertex loses at least alpha
    // with probability above alpha.
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        MarketModel m = fixtures::random_instance(seed, {.allow_d2 = false});
        if (!validate_model(m).valid()) continue;
        NAReport rep = check_na_global(m);
        if (!rep.na_qT) continue;
        NonPolarMask mask = nonpolar_mask(m);
        for (const NodeNARecord& rec : rep.nodes) {
            if (rec.geometry.dim != 1) continue;
            double alpha = rec.verdict.alpha;
            for (double sign : {1.0, -1.0}) {
                Vec h = scaled(rec.geometry.d_basis[0], sign);
                double best = 0.0;
                for (const Vec& v :
                     m.priors[static_cast<std::size_t>(rec.node)].vertices) {
                    double tail = 0.0;
                    std::size_t si = 0;
                    for (std::size_t c = 0;
                         c < m.nodes[static_cast<std::size_t>(rec.node)].children.size();
                         ++c) {
                        int child = m.nodes[static_cast<std::size_t>(rec.node)].children[c];
                        if (!mask(child)) continue;
                        if (dot(h, rec.geometry.support_points[si]) < -alpha + 1e-12)
                            tail += v[c];
                        ++si;
                    }
                    best = std::max(best, tail);
                }
                CHECK(best > alpha - 1e-12);
            }
        }
    }
}

TEST_CASE("global report: bin2 margins follow the increment scale") {
    MarketModel m = fixtures::bin2();
    NAReport rep = check_na_global(m);
    CHECK(rep.na_qT);
    REQUIRE(rep.nodes.size() == 3);
    for (const NodeNARecord& rec : rep.nodes) CHECK(rec.verdict.holds);
    // the margin level counts absolute losses: the down node's increments
    // {+0.5, -0.25} only clear the 1/n threshold from n = 4 on
    CHECK(rep.alpha_at(m.find_node("0")) == 0.5);
    CHECK(rep.alpha_at(m.find_node("0u")) == 0.5);
    CHECK(rep.alpha_at(m.find_node("0d")) == 0.25);
    CHECK(rep.sna.sna);
}

TEST_CASE("global report: a single corrupted node flips the gate") {
    MarketModel m = fixtures::bin2();
    int up = m.find_node("0u");
    m.priors[static_cast<std::size_t>(up)].vertices = {{1.0, 0.0}};
    NAReport rep = check_na_global(m);
    CHECK_FALSE(rep.na_qT);
    const NodeNARecord* rec = rep.find(up);
    REQUIRE(rec != nullptr);
    CHECK_FALSE(rec->verdict.holds);

    MarketModel flat = fixtures::flat_tree(2);
    CHECK(check_na_global(flat).na_qT);
}

TEST_CASE("sNA: degenerate vertex breaks it while the global gate survives") {
    MarketModel m = fixtures::bin1_extra_vertex();
    NAReport rep = check_na_global(m);
    CHECK(rep.na_qT);
    CHECK_FALSE(rep.sna.sna);
    bool found_failing = false;
    for (const SnaMargin& sm : rep.sna.margins)
        if (!sm.holds) {
            found_failing = true;
            CHECK(sm.vertex == 2);
        }
    CHECK(found_failing);
}

TEST_CASE("sNA equals NA on single-prior models") {
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        MarketModel m = fixtures::random_instance(seed, {.single_prior = true});
        if (!validate_model(m).valid()) continue;
        NAReport rep = check_na_global(m);
        CHECK(rep.na_qT == rep.sna.sna);
    }
}

TEST_CASE("LP verdicts agree with the classical checker") {
    int checked = 0;
    for (std::uint64_t seed = 400; seed < 480 && checked < 60; ++seed) {
        MarketModel m = fixtures::random_instance(seed, {.single_prior = true});
        if (!validate_model(m).valid()) continue;
        ++checked;
        CHECK(check_na_global(m).na_qT == fixtures::classical_na_global(m));
    }
    CHECK(checked >= 50);
}

TEST_CASE("property: NA verdict invariances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::uint64_t seed = 500; seed < 530; ++seed) {
        MarketModel m = fixtures::random_instance(seed, {.max_periods = 1});
        if (!validate_model(m).valid()) continue;
        NonPolarMask mask = nonpolar_mask(m);
        bool before = check_na_node(m, mask, 0).holds;

        // redundant vertex
        MarketModel red = m;
        auto& verts = red.priors[0].vertices;
        Vec mix(verts[0].size(), 0.0);
        for (const Vec& v : verts)
            for (std::size_t c = 0; c < mix.size(); ++c)
                mix[c] += v[c] / static_cast<double>(verts.size());
        verts.push_back(mix);
        CHECK(check_na_node(red, nonpolar_mask(red), 0).holds == before);

        // uniform positive scaling of the increments
        MarketModel scaled_m = m;
        for (Node& n : scaled_m.nodes) {
            if (n.depth != 1) continue;
            for (int a = 0; a < m.asset_count; ++a)
                n.prices[a] = m.nodes[0].prices[a] +
                              3.0 * (n.prices[a] - m.nodes[0].prices[a]);
        }
        CHECK(check_na_node(scaled_m, nonpolar_mask(scaled_m), 0).holds == before);

        // invertible linear map on a two-asset instance
        if (m.asset_count == 2) {
            double a = 1.0 + 0.2 * u(rng), b = 0.3 * u(rng);
            double c = 0.3 * u(rng), d = 1.0 + 0.2 * u(rng);
            if (std::fabs(a * d - b * c) > 0.1) {
                MarketModel lin = m;
                lin.price_floor = 100.0;  // transformed prices may dip below zero
                for (Node& n : lin.nodes) {
                    double p0 = n.prices[0], p1 = n.prices[1];
                    n.prices[0] = a * p0 + b * p1;
                    n.prices[1] = c * p0 + d * p1;
                }
                CHECK(check_na_node(lin, nonpolar_mask(lin), 0).holds == before);
            }
        }
    }
}
