#include "robustdp/simplex.hpp"

#include <cstddef>

#include "robustdp/errors.hpp"

namespace robustdp {

namespace {
constexpr double kPivotTol = 1e-11;
}

LpResult simplex_max(const std::vector<Vec>& A, const Vec& b, const Vec& c,
                     int max_iter) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    for (double bi : b)
        if (bi < 0.0) throw LpFailure("simplex_max requires b >= 0");

    // Tableau rows: [structural | slack | rhs]; last row holds -reduced costs.
    const std::size_t cols = n + m + 1;
    std::vector<Vec> t(m + 1, Vec(cols, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][cols - 1] = b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

    for (int iter = 0; iter < max_iter; ++iter) {
        // Bland: entering = smallest-index column with negative objective row.
        std::size_t enter = cols;
        for (std::size_t j = 0; j + 1 < cols; ++j)
            if (t[m][j] < -kPivotTol) { enter = j; break; }
        if (enter == cols) {
            LpResult res;
            res.value = t[m][cols - 1];
            res.x.assign(n, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                if (basis[i] < n) res.x[basis[i]] = t[i][cols - 1];
            return res;
        }

        // Ratio test; ties resolved by smallest basis index (Bland again).
        std::size_t leave = m;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (t[i][enter] <= kPivotTol) continue;
            double ratio = t[i][cols - 1] / t[i][enter];
            if (leave == m || ratio < best_ratio - kPivotTol ||
                (ratio < best_ratio + kPivotTol && basis[i] < basis[leave])) {
                leave = i;
                best_ratio = ratio;
            }
        }
        if (leave == m) throw LpFailure("simplex_max: unbounded objective");

        double piv = t[leave][enter];
        for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= piv;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            double f = t[i][enter];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
        }
        basis[leave] = enter;
    }
    throw LpFailure("simplex_max: iteration limit reached");
}

}  // namespace robustdp
