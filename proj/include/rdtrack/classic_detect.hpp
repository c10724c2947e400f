#pragma once

#include <vector>

#include "rdtrack/rd_pipeline.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::detect {

struct CfarConfig {
    int train_cells = 8;  // per side per dimension
    int guard_cells = 2;  // per side per dimension
    double pfa_design = 1e-3;

    void validate() const {
        if (train_cells < 1) throw ConfigError("cfar: train_cells must be >= 1");
        if (guard_cells < 0) throw ConfigError("cfar: guard_cells must be >= 0");
        if (!(pfa_design > 0.0 && pfa_design < 1.0))
            throw ConfigError("cfar: pfa_design must be in (0,1)");
    }
};

// 2D cell-averaging CFAR over |x|^2. Square training band with per-dimension
// guard, clamped at the grid edges; the scale factor uses the exponential-noise
// closed form alpha = N_t * (pfa^(-1/N_t) - 1) with the realized training count.
// A cell fires on strict exceedance.
std::vector<Detection> ca_cfar(const rd::RDMatrix& rdm, const CfarConfig& cfg);
std::vector<Detection> ca_cfar_serial(const rd::RDMatrix& rdm, const CfarConfig& cfg);

/// Oracle threshold from sorted clutter energies: with k = floor(pfa * N_clutter),
/// the (k+1)-th largest clutter energy. Strict exceedance then yields exactly k
/// clutter false alarms when energies are distinct.
double monte_carlo_threshold(const rd::RDMatrix& rdm, const std::vector<char>& truth_mask,
                             double pfa);

/// Cells with energy strictly above threshold, at integer bin centers.
std::vector<Detection> threshold_detect(const rd::RDMatrix& rdm, double threshold);

/// Confidence for classical detections: 1 - exp(-(energy/threshold - 1)),
/// strictly increasing in energy, (0,1). Degenerate thresholds <= 0 map to 1.
double exceedance_confidence(double energy, double threshold);

/// Standard DBSCAN over (range_bin, doppler_bin). Clusters collapse to a
/// confidence-weighted centroid whose confidence is the cluster max and whose
/// energy is the member sum; noise points pass through with `noise` set.
std::vector<Detection> dbscan_cluster(const std::vector<Detection>& dets, double eps,
                                      int min_pts);

}  // namespace rdtrack::detect
