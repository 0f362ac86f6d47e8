#pragma once

#include <optional>

#include "robustdp/market_model.hpp"

namespace robustdp {

/// Parametric recombining-id binomial/trinomial tree with an interval prior
/// on the branch probabilities. Deterministic for fixed parameters; the
/// optional jitter perturbs the price factors reproducibly from the seed.
struct TreeGenSpec {
    int periods = 1;
    double s0 = 1.0;
    double up = 2.0;
    double down = 0.5;
    std::optional<double> mid;   // trinomial when set
    double p_lo = 0.4;           // up-probability interval
    double p_hi = 0.6;
    double pm_lo = 0.2;          // mid-probability interval (trinomial only)
    double pm_hi = 0.4;
    UtilityFamily family = UtilityFamily::Log;
    double power_p = 0.5;
    double price_floor = 0.0;
    double jitter = 0.0;         // relative factor noise, 0 = fully parametric
    std::uint64_t seed = 1;
};

MarketModel generate_tree(const TreeGenSpec& spec);

}  // namespace robustdp
