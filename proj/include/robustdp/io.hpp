#pragma once

#include <string>

#include "json.hpp"
#include "robustdp/arbitrage.hpp"
#include "robustdp/dp_engine.hpp"
#include "robustdp/market_model.hpp"
#include "robustdp/oracle.hpp"

namespace robustdp {

using json = nlohmann::json;

/// Model files are a single JSON document: horizon, asset_count, price_floor,
/// nodes (id, parent, depth, prices[]), priors (node id -> vertices[][]) and
/// utility (family, params, per_leaf overrides). Node order in the file fixes
/// child order. Structural problems throw ModelFormatError; semantic ones are
/// left to validate_model.
MarketModel model_from_json(const json& j);
MarketModel load_model_file(const std::string& path);
json model_to_json(const MarketModel& model);
void save_model_file(const MarketModel& model, const std::string& path);

json na_report_to_json(const MarketModel& model, const NAReport& report);

/// Strategy profile files map node id -> position vector.
StrategyProfile profile_from_json(const MarketModel& model, const json& j);
json profile_to_json(const MarketModel& model, const StrategyProfile& profile);

/// Lossless decimal rendering of binary64 (17 significant digits).
std::string format_g17(double v);

void write_values_csv(const std::string& path, const MarketModel& model,
                      const WealthGrid& grid, const ValueSurface& surface);
void write_policy_csv(const std::string& path, const MarketModel& model,
                      const PolicyTrace& trace);

}  // namespace robustdp
