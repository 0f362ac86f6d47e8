#include "robustdp/io.hpp"

#include <cstdio>
#include <fstream>

#include "robustdp/errors.hpp"

namespace robustdp {

namespace {

UtilityFamily family_from_string(const std::string& s) {
    if (s == "log") return UtilityFamily::Log;
    if (s == "power") return UtilityFamily::Power;
    if (s == "piecewise_linear" || s == "piecewise_linear_concave")
        return UtilityFamily::PiecewiseLinear;
    throw ModelFormatError("unknown utility family '" + s + "'");
}

std::string family_to_string(UtilityFamily f) {
    switch (f) {
        case UtilityFamily::Log: return "log";
        case UtilityFamily::Power: return "power";
        case UtilityFamily::PiecewiseLinear: return "piecewise_linear";
    }
    return "log";
}

}  // namespace

MarketModel model_from_json(const json& j) {
    MarketModel model;
    try {
        model.horizon = j.at("horizon").get<int>();
        model.asset_count = j.at("asset_count").get<int>();
        model.price_floor = j.value("price_floor", 0.0);

        for (const json& nj : j.at("nodes")) {
            Node node;
            node.id = nj.at("id").get<std::string>();
            node.depth = nj.at("depth").get<int>();
            node.prices = nj.at("prices").get<Vec>();
            if (nj.contains("parent") && !nj.at("parent").is_null()) {
                std::string pid = nj.at("parent").get<std::string>();
                node.parent = model.find_node(pid);
                if (node.parent < 0)
                    throw ModelFormatError("node '" + node.id +
                                           "' references parent '" + pid +
                                           "' before it is defined");
            }
            int idx = static_cast<int>(model.nodes.size());
            if (node.parent >= 0) model.nodes[node.parent].children.push_back(idx);
            else if (model.root < 0) model.root = idx;
            model.nodes.push_back(std::move(node));
        }
        if (model.root < 0) throw ModelFormatError("no root node in file");

        model.priors.resize(model.nodes.size());
        if (j.contains("priors"))
            for (auto& [id, verts] : j.at("priors").items()) {
                int n = model.find_node(id);
                if (n < 0)
                    throw ModelFormatError("priors entry for unknown node '" + id + "'");
                model.priors[n].vertices = verts.get<std::vector<Vec>>();
            }

        if (j.contains("utility")) {
            const json& uj = j.at("utility");
            model.utility.family = family_from_string(uj.at("family").get<std::string>());
            const json params = uj.value("params", json::object());
            if (model.utility.family == UtilityFamily::Power)
                model.utility.power_p = params.at("p").get<double>();
            if (model.utility.family == UtilityFamily::PiecewiseLinear)
                for (const json& kn : params.at("knots"))
                    model.utility.knots.emplace_back(kn.at(0).get<double>(),
                                                     kn.at(1).get<double>());
            const json per_leaf = uj.value("per_leaf", json::object());
            for (auto& [id, adj] : per_leaf.items()) {
                LeafAdjust la;
                la.weight = adj.value("weight", 1.0);
                la.shift = adj.value("shift", 0.0);
                model.utility.per_leaf[id] = la;
            }
        }
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("model file does not match the schema: ") +
                               e.what());
    }
    return model;
}

MarketModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelFormatError("cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

json model_to_json(const MarketModel& model) {
    json j;
    j["horizon"] = model.horizon;
    j["asset_count"] = model.asset_count;
    j["price_floor"] = model.price_floor;
    j["nodes"] = json::array();
    for (const Node& n : model.nodes) {
        json nj;
        nj["id"] = n.id;
        nj["parent"] = n.parent < 0 ? json() : json(model.nodes[n.parent].id);
        nj["depth"] = n.depth;
        nj["prices"] = n.prices;
        j["nodes"].push_back(std::move(nj));
    }
    j["priors"] = json::object();
    for (std::size_t i = 0; i < model.nodes.size(); ++i)
        if (!model.priors[i].vertices.empty())
            j["priors"][model.nodes[i].id] = model.priors[i].vertices;
    json uj;
    uj["family"] = family_to_string(model.utility.family);
    uj["params"] = json::object();
    if (model.utility.family == UtilityFamily::Power)
        uj["params"]["p"] = model.utility.power_p;
    if (model.utility.family == UtilityFamily::PiecewiseLinear) {
        json knots = json::array();
        for (auto& [x, u] : model.utility.knots) knots.push_back({x, u});
        uj["params"]["knots"] = std::move(knots);
    }
    if (!model.utility.per_leaf.empty()) {
        json pl = json::object();
        for (auto& [id, adj] : model.utility.per_leaf)
            pl[id] = {{"weight", adj.weight}, {"shift", adj.shift}};
        uj["per_leaf"] = std::move(pl);
    }
    j["utility"] = std::move(uj);
    return j;
}

void save_model_file(const MarketModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ModelFormatError("cannot write model file '" + path + "'");
    out << model_to_json(model).dump(2) << "\n";
}

json na_report_to_json(const MarketModel& model, const NAReport& report) {
    json j;
    j["na_qT"] = report.na_qT;
    j["sna"] = report.sna.sna;
    j["margin_note"] = report.margin_note;
    j["nodes"] = json::array();
    for (const NodeNARecord& rec : report.nodes) {
        json nj;
        nj["node"] = model.nodes[rec.node].id;
        nj["holds"] = rec.verdict.holds;
        nj["dim"] = rec.geometry.dim;
        nj["support"] = rec.geometry.support_points;
        if (rec.verdict.holds) {
            nj["alpha"] = rec.verdict.alpha;
            nj["n0"] = rec.verdict.n0;
            nj["alpha_exact"] = rec.verdict.alpha_exact;
        } else {
            nj["certificate"] = rec.verdict.certificate;
        }
        j["nodes"].push_back(std::move(nj));
    }
    j["sna_margins"] = json::array();
    for (const SnaMargin& m : report.sna.margins) {
        json mj;
        mj["node"] = model.nodes[m.node].id;
        mj["vertex"] = m.vertex;
        mj["holds"] = m.holds;
        if (m.holds) mj["alpha"] = m.alpha;
        j["sna_margins"].push_back(std::move(mj));
    }
    return j;
}

StrategyProfile profile_from_json(const MarketModel& model, const json& j) {
    StrategyProfile profile;
    for (auto& [id, h] : j.items()) {
        int n = model.find_node(id);
        if (n < 0) throw ModelFormatError("profile entry for unknown node '" + id + "'");
        Vec pos = h.get<Vec>();
        if (static_cast<int>(pos.size()) != model.asset_count)
            throw ModelFormatError("profile position for '" + id +
                                   "' has wrong dimension");
        profile[n] = std::move(pos);
    }
    return profile;
}

json profile_to_json(const MarketModel& model, const StrategyProfile& profile) {
    json j = json::object();
    for (auto& [node, h] : profile) j[model.nodes[node].id] = h;
    return j;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_values_csv(const std::string& path, const MarketModel& model,
                      const WealthGrid& grid, const ValueSurface& surface) {
    std::ofstream out(path);
    if (!out) throw ModelFormatError("cannot write values csv '" + path + "'");
    out << "node_id,depth,wealth_knot,value\n";
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        if (!surface.built(static_cast<int>(i))) continue;
        const Node& n = model.nodes[i];
        const Vec& knots = grid.knots[static_cast<std::size_t>(n.depth)];
        const ConcaveValueTable& table = surface.at(static_cast<int>(i));
        for (std::size_t k = 0; k < knots.size(); ++k)
            out << n.id << ',' << n.depth << ',' << format_g17(knots[k]) << ','
                << format_g17(table.values()[k]) << '\n';
    }
}

void write_policy_csv(const std::string& path, const MarketModel& model,
                      const PolicyTrace& trace) {
    std::ofstream out(path);
    if (!out) throw ModelFormatError("cannot write policy csv '" + path + "'");
    out << "node_id,depth,realized_wealth";
    for (int i = 1; i <= model.asset_count; ++i) out << ",h_" << i;
    out << ",worst_vertex,continuation_value\n";
    for (const PolicyRow& row : trace.rows) {
        out << model.nodes[row.node].id << ',' << row.depth << ','
            << format_g17(row.wealth);
        for (int i = 0; i < model.asset_count; ++i)
            out << ',' << format_g17(row.h.empty() ? 0.0 : row.h[static_cast<std::size_t>(i)]);
        out << ',' << row.worst_vertex << ',' << format_g17(row.continuation) << '\n';
    }
}

}  // namespace robustdp
