#pragma once

#include <vector>

namespace rdtrack {

/// Dense rectangular cost matrix, row-major.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> cost;

    CostMatrix() = default;
    CostMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), cost(static_cast<size_t>(r) * c, fill) {}
    double& at(int r, int c) { return cost[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return cost[static_cast<size_t>(r) * cols + c]; }
};

/// Minimum-cost assignment (Jonker-Volgenant style shortest augmenting paths).
/// Returns match[row] = column, or -1 for rows left unassigned when rows > cols.
/// Every row is assigned when rows <= cols. Deterministic: ties resolve toward
/// the lowest scanned index.
std::vector<int> solve_assignment(const CostMatrix& m);

}  // namespace rdtrack
