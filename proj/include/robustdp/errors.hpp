#pragma once

#include <stdexcept>
#include <string>

namespace robustdp {

/// Model file could not be parsed into the schema (structural problem, as
/// opposed to a semantic violation reported by validate_model).
struct ModelFormatError : std::runtime_error {
    explicit ModelFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An operation was invoked outside its contract (leaf passed where an
/// internal node is required, margin requested on an arbitrage node, ...).
struct PreconditionError : std::logic_error {
    explicit PreconditionError(const std::string& msg) : std::logic_error(msg) {}
};

/// The LP used for the no-arbitrage verdict did not terminate cleanly or its
/// certificate failed the independent recheck. Surfaced as its own type so a
/// solver hiccup is never silently turned into a verdict.
struct LpFailure : std::runtime_error {
    explicit LpFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// A value table was queried above its last knot.
struct GridRangeError : std::runtime_error {
    explicit GridRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Brute-force search would exceed its evaluation budget.
struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace robustdp
