#pragma once

#include "robustdp/numeric.hpp"

namespace robustdp {

struct LpResult {
    double value = 0.0;
    Vec x;  // primal solution, length = number of structural variables
};

/// Dense primal simplex for  max c.x  s.t.  A x <= b, x >= 0  with b >= 0,
/// so the slack basis is feasible from the start. Bland's rule keeps the
/// method from cycling on the degenerate bases this codebase produces
/// (many zero right-hand sides). Throws LpFailure on non-termination.
LpResult simplex_max(const std::vector<Vec>& A, const Vec& b, const Vec& c,
                     int max_iter = 20000);

}  // namespace robustdp
