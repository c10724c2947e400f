#include "rdtrack/hungarian.hpp"

#include <algorithm>
#include <limits>

namespace rdtrack {

namespace {

// n <= m assumed; 1-based potentials, p[j] = row matched to column j.
std::vector<int> solve_rows_leq_cols(const CostMatrix& m) {
    const int n = m.rows, w = m.cols;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(w + 1, 0.0), minv(w + 1, 0.0);
    std::vector<int> p(w + 1, 0), way(w + 1, 0);
    std::vector<char> used(w + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= w; ++j) {
                if (used[j]) continue;
                const double cur = m.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= w; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> match(n, -1);
    for (int j = 1; j <= w; ++j)
        if (p[j] != 0) match[p[j] - 1] = j - 1;
    return match;
}

}  // namespace

std::vector<int> solve_assignment(const CostMatrix& m) {
    if (m.rows == 0 || m.cols == 0) return std::vector<int>(m.rows, -1);
    if (m.rows <= m.cols) return solve_rows_leq_cols(m);
    // transpose
    CostMatrix t(m.cols, m.rows);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
    const auto col_match = solve_rows_leq_cols(t);
    std::vector<int> match(m.rows, -1);
    for (int c = 0; c < m.cols; ++c)
        if (col_match[c] >= 0) match[col_match[c]] = c;
    return match;
}

}  // namespace rdtrack
