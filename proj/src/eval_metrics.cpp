#include "rdtrack/eval_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rdtrack/hungarian.hpp"

namespace rdtrack::eval {

PdPfaResult pd_pfa(const std::vector<Detection>& dets, const GroundTruthFrame& truth,
                   double tol_range_bins, double tol_doppler_bins, std::size_t grid_cells) {
    if (tol_range_bins < 0 || tol_doppler_bins < 0)
        throw ConfigError("pd_pfa: tolerances must be >= 0");
    struct Cand {
        double dist2;
        int det, tru;
    };
    std::vector<Cand> cands;
    for (int i = 0; i < static_cast<int>(dets.size()); ++i) {
        for (int j = 0; j < static_cast<int>(truth.entries.size()); ++j) {
            const double dr = dets[i].range_bin - truth.entries[j].range_bin;
            const double dd = dets[i].doppler_bin - truth.entries[j].doppler_bin;
            if (std::abs(dr) <= tol_range_bins && std::abs(dd) <= tol_doppler_bins)
                cands.push_back({dr * dr + dd * dd, i, j});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
        if (a.det != b.det) return a.det < b.det;
        return a.tru < b.tru;
    });

    PdPfaResult res;
    std::vector<char> det_used(dets.size(), 0), tru_used(truth.entries.size(), 0);
    for (const auto& c : cands) {
        if (det_used[c.det] || tru_used[c.tru]) continue;
        det_used[c.det] = tru_used[c.tru] = 1;
        res.matches.emplace_back(c.det, c.tru);
    }
    res.pd = truth.entries.empty()
                 ? 1.0
                 : static_cast<double>(res.matches.size()) / truth.entries.size();
    res.pfa = grid_cells == 0 ? 0.0
                              : static_cast<double>(dets.size() - res.matches.size()) /
                                    static_cast<double>(grid_cells);
    return res;
}

double ospa(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y,
            const OspaParams& params) {
    params.validate();
    const auto* small = &x;
    const auto* large = &y;
    if (small->size() > large->size()) std::swap(small, large);
    const std::size_t m = small->size(), n = large->size();
    if (n == 0) return 0.0;
    const double c = params.cutoff, p = params.order;

    double assign_sum = 0.0;
    if (m > 0) {
        CostMatrix cm(static_cast<int>(m), static_cast<int>(n));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < (*small)[i].size(); ++k) {
                    const double d = (*small)[i][k] - (*large)[j][k];
                    d2 += d * d;
                }
                cm.at(static_cast<int>(i), static_cast<int>(j)) =
                    std::pow(std::min(std::sqrt(d2), c), p);
            }
        }
        const auto match = solve_assignment(cm);
        for (std::size_t i = 0; i < m; ++i) assign_sum += cm.at(static_cast<int>(i), match[i]);
    }
    const double total = assign_sum + std::pow(c, p) * static_cast<double>(n - m);
    return std::pow(total / static_cast<double>(n), 1.0 / p);
}

Summary summarize(const std::vector<double>& per_frame) {
    if (per_frame.empty()) throw DataError("summarize: empty input");
    Summary s;
    s.series = per_frame;
    double acc = 0.0;
    for (double v : per_frame) acc += v;
    s.mean = acc / static_cast<double>(per_frame.size());
    std::vector<double> sorted = per_frame;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

}  // namespace rdtrack::eval
