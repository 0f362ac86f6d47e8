#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "robustdp/dp_engine.hpp"
#include "robustdp/errors.hpp"
#include "robustdp/io.hpp"

using namespace robustdp;

TEST_CASE("model json round trip preserves the instance") {
    MarketModel m = fixtures::bin2();
    m.utility.per_leaf["0uu"] = {2.0, 0.5};
    json j = model_to_json(m);
    MarketModel back = model_from_json(j);
    CHECK(validate_model(back).valid());
    REQUIRE(back.nodes.size() == m.nodes.size());
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
        CHECK(back.nodes[i].id == m.nodes[i].id);
        CHECK(back.nodes[i].prices == m.nodes[i].prices);
        CHECK(back.priors[i].vertices == m.priors[i].vertices);
    }
    CHECK(back.utility.per_leaf.at("0uu").weight == 2.0);

    // identical solve through the round-tripped instance
    double v1 = fixed_strategy_worst_case(m, {{0, {0.2}}}, 1.0);
    double v2 = fixed_strategy_worst_case(back, {{0, {0.2}}}, 1.0);
    CHECK(v1 == v2);
}

TEST_CASE("power and piecewise utilities survive the file format") {
    MarketModel m = fixtures::bin1();
    m.utility.family = UtilityFamily::Power;
    m.utility.power_p = 0.37;
    MarketModel back = model_from_json(model_to_json(m));
    CHECK(back.utility.family == UtilityFamily::Power);
    CHECK(back.utility.power_p == 0.37);

    m.utility.family = UtilityFamily::PiecewiseLinear;
    m.utility.knots = {{0.0, -1.0}, {1.0, 0.5}, {2.0, 1.0}};
    MarketModel back2 = model_from_json(model_to_json(m));
    REQUIRE(back2.utility.knots.size() == 3);
    CHECK(back2.utility.knots[1].second == 0.5);
}

TEST_CASE("schema problems are format errors, not crashes") {
    CHECK_THROWS_AS(model_from_json(json::parse(R"({"horizon": 1})")),
                    ModelFormatError);
    json j = model_to_json(fixtures::bin1());
    j["nodes"][1]["parent"] = "nope";
    CHECK_THROWS_AS(model_from_json(j), ModelFormatError);
}

TEST_CASE("na report serialization carries verdicts and margins") {
    MarketModel m = fixtures::bin1_extra_vertex();
    NAReport rep = check_na_global(m);
    json j = na_report_to_json(m, rep);
    CHECK(j["na_qT"] == true);
    CHECK(j["sna"] == false);
    REQUIRE(j["nodes"].size() == 1);
    CHECK(j["nodes"][0]["alpha"] == 0.5);
    CHECK(j["nodes"][0]["dim"] == 1);
    bool has_failing_margin = false;
    for (const auto& mj : j["sna_margins"])
        has_failing_margin = has_failing_margin || mj["holds"] == false;
    CHECK(has_failing_margin);

    MarketModel bad = fixtures::one_sided();
    json jb = na_report_to_json(bad, check_na_global(bad));
    CHECK(jb["na_qT"] == false);
    CHECK(jb["nodes"][0].contains("certificate"));
}

TEST_CASE("profile files map ids to positions") {
    MarketModel m = fixtures::bin2();
    StrategyProfile p{{m.find_node("0"), {0.2}}, {m.find_node("0u"), {0.12}}};
    json j = profile_to_json(m, p);
    StrategyProfile back = profile_from_json(m, j);
    CHECK(back == p);
    CHECK_THROWS_AS(profile_from_json(m, json::parse(R"({"zz": [1.0]})")),
                    ModelFormatError);
    CHECK_THROWS_AS(profile_from_json(m, json::parse(R"({"0": [1.0, 2.0]})")),
                    ModelFormatError);
}

TEST_CASE("g17 rendering round-trips binary64") {
    for (double v : {0.1, 1.0 / 3.0, 0.0097123133228860792, -1e-300, 3.75}) {
        std::string s = format_g17(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("csv emission writes one row per knot and trace node") {
    MarketModel m = fixtures::bin1();
    NonPolarMask mask = nonpolar_mask(m);
    NAReport rep = check_na_global(m);
    GridSpec gs;
    gs.knot_count = 33;
    WealthGrid grid = build_grid(m, 1.0, rep, gs);
    ValueSurface surface = backward_induct(m, mask, rep, grid);
    PolicyTrace trace = extract_policy(m, mask, rep, surface, 1.0);

    std::string vpath = "test_values_tmp.csv";
    std::string ppath = "test_policy_tmp.csv";
    write_values_csv(vpath, m, grid, surface);
    write_policy_csv(ppath, m, trace);

    auto count_lines = [](const std::string& path) {
        std::ifstream in(path);
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line))
            if (!line.empty()) ++n;
        return n;
    };
    std::size_t expected_rows = 0;
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        if (surface.built(static_cast<int>(i)))
            expected_rows += grid.knots[static_cast<std::size_t>(m.nodes[i].depth)].size();
    CHECK(count_lines(vpath) == expected_rows + 1);
    CHECK(count_lines(ppath) == trace.rows.size() + 1);

    std::ifstream in(ppath);
    std::string header;
    std::getline(in, header);
    CHECK(header == "node_id,depth,realized_wealth,h_1,worst_vertex,continuation_value");
    std::remove(vpath.c_str());
    std::remove(ppath.c_str());
}
