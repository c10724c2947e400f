#include "rdtrack/classic_detect.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rdtrack::detect {

namespace {

template <bool Parallel>
std::vector<Detection> ca_cfar_impl(const rd::RDMatrix& rdm, const CfarConfig& cfg) {
    cfg.validate();
    const int rows = rdm.rows;
    const int cols = rdm.cols;
    const int ext = cfg.train_cells + cfg.guard_cells;
    const int guard = cfg.guard_cells;

    std::vector<double> energy(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int d = 0; d < cols; ++d)
            energy[static_cast<size_t>(r) * cols + d] = rdm.energy_at(r, d);

    std::vector<std::vector<Detection>> per_row(rows);
#pragma omp parallel for schedule(static) if (Parallel)
    for (int r = 0; r < rows; ++r) {
        const int r0 = std::max(0, r - ext), r1 = std::min(rows - 1, r + ext);
        for (int d = 0; d < cols; ++d) {
            const int d0 = std::max(0, d - ext), d1 = std::min(cols - 1, d + ext);
            double sum = 0.0;
            int count = 0;
            for (int rr = r0; rr <= r1; ++rr) {
                const double* row = energy.data() + static_cast<size_t>(rr) * cols;
                const bool guard_row = std::abs(rr - r) <= guard;
                for (int dd = d0; dd <= d1; ++dd) {
                    if (guard_row && std::abs(dd - d) <= guard) continue;
                    sum += row[dd];
                    ++count;
                }
            }
            if (count == 0) continue;
            const double alpha = count * (std::pow(cfg.pfa_design, -1.0 / count) - 1.0);
            const double threshold = alpha * (sum / count);
            const double e = energy[static_cast<size_t>(r) * cols + d];
            if (e > threshold) {
                Detection det;
                det.range_bin = r;
                det.doppler_bin = d;
                det.energy = e;
                det.confidence = exceedance_confidence(e, threshold);
                per_row[r].push_back(det);
            }
        }
    }

    std::vector<Detection> out;
    for (auto& v : per_row) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace

std::vector<Detection> ca_cfar(const rd::RDMatrix& rdm, const CfarConfig& cfg) {
    return ca_cfar_impl<true>(rdm, cfg);
}
std::vector<Detection> ca_cfar_serial(const rd::RDMatrix& rdm, const CfarConfig& cfg) {
    return ca_cfar_impl<false>(rdm, cfg);
}

double monte_carlo_threshold(const rd::RDMatrix& rdm, const std::vector<char>& truth_mask,
                             double pfa) {
    if (truth_mask.size() != rdm.cells.size())
        throw DataError("monte_carlo_threshold: mask size mismatch");
    std::vector<double> clutter;
    clutter.reserve(rdm.cells.size());
    for (std::size_t i = 0; i < rdm.cells.size(); ++i)
        if (!truth_mask[i]) clutter.push_back(std::norm(rdm.cells[i]));
    const std::size_t k = static_cast<std::size_t>(pfa * static_cast<double>(clutter.size()));
    if (clutter.size() < k + 1)
        throw DataError("monte_carlo_threshold: insufficient clutter cells");
    // (k+1)-th largest
    std::nth_element(clutter.begin(), clutter.begin() + k, clutter.end(), std::greater<>());
    return clutter[k];
}

std::vector<Detection> threshold_detect(const rd::RDMatrix& rdm, double threshold) {
    std::vector<Detection> out;
    for (int r = 0; r < rdm.rows; ++r) {
        for (int d = 0; d < rdm.cols; ++d) {
            const double e = rdm.energy_at(r, d);
            if (e > threshold) {
                Detection det;
                det.range_bin = r;
                det.doppler_bin = d;
                det.energy = e;
                det.confidence = exceedance_confidence(e, threshold);
                out.push_back(det);
            }
        }
    }
    return out;
}

double exceedance_confidence(double energy, double threshold) {
    if (!(threshold > 0.0)) return 1.0;
    return 1.0 - std::exp(-(energy / threshold - 1.0));
}

namespace {

int uf_find(std::vector<int>& parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

}  // namespace

// Union-find over core points plus nearest-core border assignment; unlike the
// textbook frontier expansion this makes the partition independent of input
// order (border ties break on the core point's coordinates, not its index).
std::vector<Detection> dbscan_cluster(const std::vector<Detection>& dets, double eps,
                                      int min_pts) {
    if (!(eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
    if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
    const int n = static_cast<int>(dets.size());
    const double eps2 = eps * eps;

    auto dist2 = [&](int i, int j) {
        const double dr = dets[i].range_bin - dets[j].range_bin;
        const double dd = dets[i].doppler_bin - dets[j].doppler_bin;
        return dr * dr + dd * dd;
    };

    std::vector<char> core(n, 0);
    for (int i = 0; i < n; ++i) {
        int count = 0;
        for (int j = 0; j < n; ++j)
            if (dist2(i, j) <= eps2) ++count;  // includes i itself
        core[i] = count >= min_pts;
    }

    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    for (int i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (int j = i + 1; j < n; ++j)
            if (core[j] && dist2(i, j) <= eps2)
                parent[uf_find(parent, i)] = uf_find(parent, j);
    }

    // cluster id of each point, -1 = noise
    std::vector<int> cluster(n, -1);
    for (int i = 0; i < n; ++i)
        if (core[i]) cluster[i] = uf_find(parent, i);
    for (int i = 0; i < n; ++i) {
        if (core[i]) continue;
        int best = -1;
        for (int j = 0; j < n; ++j) {
            if (!core[j] || dist2(i, j) > eps2) continue;
            if (best < 0) {
                best = j;
                continue;
            }
            const double a = dist2(i, j), b = dist2(i, best);
            if (a < b ||
                (a == b && std::pair(dets[j].range_bin, dets[j].doppler_bin) <
                               std::pair(dets[best].range_bin, dets[best].doppler_bin)))
                best = j;
        }
        if (best >= 0) cluster[i] = uf_find(parent, best);
    }

    std::vector<Detection> out;
    std::vector<char> done(n, 0);
    for (int root = 0; root < n; ++root) {
        if (cluster[root] != root || done[root]) continue;
        done[root] = 1;
        double wsum = 0.0, r_acc = 0.0, d_acc = 0.0, e_acc = 0.0, conf = 0.0;
        for (int i = 0; i < n; ++i) {
            if (cluster[i] != root) continue;
            const double w = std::max(dets[i].confidence, 1e-12);
            wsum += w;
            r_acc += w * dets[i].range_bin;
            d_acc += w * dets[i].doppler_bin;
            e_acc += dets[i].energy;
            conf = std::max(conf, dets[i].confidence);
        }
        Detection det;
        det.range_bin = r_acc / wsum;
        det.doppler_bin = d_acc / wsum;
        det.confidence = conf;
        det.energy = e_acc;
        out.push_back(det);
    }
    for (int i = 0; i < n; ++i) {
        if (cluster[i] < 0) {
            Detection det = dets[i];
            det.noise = true;
            out.push_back(det);
        }
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return std::pair(a.range_bin, a.doppler_bin) < std::pair(b.range_bin, b.doppler_bin);
    });
    return out;
}

}  // namespace rdtrack::detect
