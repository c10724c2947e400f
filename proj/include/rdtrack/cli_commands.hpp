#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdtrack/classic_detect.hpp"
#include "rdtrack/neural_detect.hpp"
#include "rdtrack/tracker.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::cli {

/// Resolve an output directory: explicit wins, else $RDTRACK_OUT_ROOT, else ".".
std::string resolve_out_dir(const std::string& explicit_out);

struct SimulateOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> snr_db;
};

/// Scenario -> frame_%04d.rdm + truth.csv + scenario.cfg + manifest.txt.
void cmd_simulate(const std::string& config_path, const std::string& out_dir,
                  const SimulateOverrides& ov = {});

struct DetectOptions {
    std::string detector = "cfar";  // cfar | montecarlo | neural
    detect::CfarConfig cfar;
    double pfa = 1e-3;              // montecarlo design point
    double conf_threshold = 0.5;    // neural decode threshold
    std::string weights_path;       // neural
    double dbscan_eps = 0.0;        // > 0 enables clustering of the detections
    int dbscan_min_pts = 1;
};

void cmd_detect(const std::string& data_dir, const std::string& out_csv,
                const DetectOptions& opt);

/// Train on the RDM frames + truth in data_dir; writes the weight file and a
/// per-epoch loss CSV beside it.
void cmd_train(const std::string& data_dir, const std::string& out_weights,
               const nn::TrainConfig& cfg);

struct TrackOptions {
    bool fixed_r = false;
    bool position_only = false;
    std::string data_dir;           // optional; enables RD feature embedding
    track::TrackerConfig tracker;
    double q_s = 0.2;
    double sigma_r = 0.6;
    double sigma_v = 0.2;
};

void cmd_track(const std::string& detections_csv, const std::string& config_path,
               const std::string& out_csv, const TrackOptions& opt);

struct EvalOptions {
    double tol_range = 1.0;
    double tol_doppler = 1.0;
    double ospa_cutoff = 5.0;
    double ospa_order = 1.0;
    std::string tracks_csv;         // optional; enables the OSPA column
};

struct EvalSummary {
    double mean_pd = 0.0;
    double mean_pfa = 0.0;
    double mean_ospa = 0.0;
};

EvalSummary cmd_eval(const std::string& detections_csv, const std::string& truth_path,
                     const std::string& config_path, const std::string& out_csv,
                     const EvalOptions& opt);

struct RunManifest {
    std::string scenario;
    std::string detector = "cfar";
    bool fixed_r = true;            // ablated baseline definition
    bool position_only = true;
    std::vector<std::uint64_t> seeds;
    std::vector<double> snr_db_list;
    std::string out_dir;
    std::string weights_path;       // neural detector
    double conf_threshold = 0.5;
    double pfa = 1e-3;

    void validate() const;
};

RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::string& path);

/// Full experiment: per-seed SNR sweep (simulate + detect + eval) and the
/// measurement-level tracking comparison (full vs ablated tracker), with
/// aggregate CSVs and SVG plots rendered from those CSVs.
void cmd_e2e(const std::string& manifest_path);

}  // namespace rdtrack::cli
