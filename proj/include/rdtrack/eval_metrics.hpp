#pragma once

#include <utility>
#include <vector>

#include "rdtrack/types.hpp"

namespace rdtrack::eval {

struct OspaParams {
    double cutoff = 5.0;  // c
    double order = 1.0;   // p

    void validate() const {
        if (!(cutoff > 0)) throw ConfigError("ospa: c must be > 0");
        if (!(order >= 1)) throw ConfigError("ospa: p must be >= 1");
    }
};

struct PdPfaResult {
    double pd = 0.0;
    double pfa = 0.0;
    std::vector<std::pair<int, int>> matches;  // (detection index, truth index)
};

/// Greedy nearest-first one-to-one matching inside a tolerance box.
/// pd = matched truths / truths (1 when there are no truths);
/// pfa = unmatched detections / total grid cells.
PdPfaResult pd_pfa(const std::vector<Detection>& dets, const GroundTruthFrame& truth,
                   double tol_range_bins, double tol_doppler_bins, std::size_t grid_cells);

/// OSPA distance between finite point sets (any shared dimension), Euclidean
/// base distance, optimal assignment computed exactly. Both sets empty -> 0.
double ospa(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
            const OspaParams& params);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
    std::vector<double> series;
};

Summary summarize(const std::vector<double>& per_frame);

}  // namespace rdtrack::eval
