#include "rdtrack/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "rdtrack/assoc_features.hpp"
#include "rdtrack/eval_metrics.hpp"
#include "rdtrack/io.hpp"
#include "rdtrack/rd_pipeline.hpp"
#include "rdtrack/signal_sim.hpp"

namespace fs = std::filesystem;

namespace rdtrack::cli {

namespace {

std::string frame_filename(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d.rdm", frame);
    return buf;
}

std::vector<std::string> list_rdm_frames(const std::string& data_dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(data_dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() == 14 && name.rfind("frame_", 0) == 0 && name.ends_with(".rdm"))
            files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no frame_*.rdm files in " + data_dir);
    return files;
}

std::vector<TargetState> targets_at_frame(const ScenarioConfig& cfg, int frame) {
    return sim::propagate_targets(cfg.targets, frame * cfg.radar.frame_period_s);
}

GroundTruthFrame truth_for(const ScenarioConfig& cfg, const std::vector<TargetState>& targets) {
    GroundTruthFrame gt;
    for (const auto& t : targets) {
        const auto [rb, db] = rd::bin_of(t.range_m, t.velocity_mps, cfg.radar);
        gt.entries.push_back({rb, db});
    }
    return gt;
}

}  // namespace

std::string resolve_out_dir(const std::string& explicit_out) {
    if (!explicit_out.empty()) return explicit_out;
    if (const char* root = std::getenv("RDTRACK_OUT_ROOT"); root && *root) return root;
    return ".";
}

void cmd_simulate(const std::string& config_path, const std::string& out_dir,
                  const SimulateOverrides& ov) {
    ScenarioConfig cfg = io::load_scenario(config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.snr_db) cfg.snr_db = *ov.snr_db;

    fs::create_directories(out_dir);
    std::vector<GroundTruthFrame> truth;
    std::ostringstream manifest;
    for (int f = 0; f < cfg.frames; ++f) {
        const auto targets = targets_at_frame(cfg, f);
        const RawEchoMatrix raw = sim::synth_echo(cfg, f, targets);
        const rd::RDMatrix rdm = rd::coherent_integrate(rd::pulse_compress(raw));
        const std::string name = frame_filename(f);
        rd::write_rdm(rdm, (fs::path(out_dir) / name).string());
        manifest << name << "\n";
        truth.push_back(truth_for(cfg, targets));
    }
    io::write_truth((fs::path(out_dir) / "truth.csv").string(), truth);
    io::save_scenario(cfg, (fs::path(out_dir) / "scenario.cfg").string());
    io::write_text_file((fs::path(out_dir) / "manifest.txt").string(), manifest.str());
}

void cmd_detect(const std::string& data_dir, const std::string& out_csv,
                const DetectOptions& opt) {
    const auto files = list_rdm_frames(data_dir);
    std::vector<GroundTruthFrame> truth;
    if (opt.detector == "montecarlo")
        truth = io::read_truth((fs::path(data_dir) / "truth.csv").string());

    nn::WeightSet weights;
    if (opt.detector == "neural") {
        if (opt.weights_path.empty()) throw ConfigError("detect: neural detector needs weights");
        weights = nn::read_weights(opt.weights_path);
    }

    std::vector<std::vector<Detection>> per_frame;
    for (std::size_t f = 0; f < files.size(); ++f) {
        const rd::RDMatrix rdm = rd::read_rdm(files[f]);
        std::vector<Detection> dets;
        if (opt.detector == "cfar") {
            dets = detect::ca_cfar(rdm, opt.cfar);
        } else if (opt.detector == "montecarlo") {
            std::vector<char> mask(rdm.cells.size(), 0);
            if (f < truth.size()) {
                for (const auto& e : truth[f].entries) {
                    const int r0 = static_cast<int>(std::lround(e.range_bin));
                    const int d0 = static_cast<int>(std::lround(e.doppler_bin));
                    for (int r = std::max(0, r0 - 1); r <= std::min(rdm.rows - 1, r0 + 1); ++r)
                        for (int d = std::max(0, d0 - 1); d <= std::min(rdm.cols - 1, d0 + 1); ++d)
                            mask[static_cast<size_t>(r) * rdm.cols + d] = 1;
                }
            }
            const double thr = detect::monte_carlo_threshold(rdm, mask, opt.pfa);
            dets = detect::threshold_detect(rdm, thr);
        } else if (opt.detector == "neural") {
            const rd::RDTensor tensor = rd::three_channel(rdm);
            nn::ForwardCache cache;
            const nn::DetectionMap map = nn::forward(tensor, weights, cache);
            dets = nn::decode_detections(map, opt.conf_threshold);
            for (auto& d : dets) {
                const int r = std::clamp(static_cast<int>(std::lround(d.range_bin)), 0,
                                         rdm.rows - 1);
                const int c = std::clamp(static_cast<int>(std::lround(d.doppler_bin)), 0,
                                         rdm.cols - 1);
                d.energy = rdm.energy_at(r, c);
            }
        } else {
            throw ConfigError("detect: unknown detector '" + opt.detector + "'");
        }
        if (opt.dbscan_eps > 0.0)
            dets = detect::dbscan_cluster(dets, opt.dbscan_eps, opt.dbscan_min_pts);
        per_frame.push_back(std::move(dets));
    }
    io::write_detections_csv(out_csv, per_frame);
}

void cmd_train(const std::string& data_dir, const std::string& out_weights,
               const nn::TrainConfig& cfg) {
    const auto files = list_rdm_frames(data_dir);
    auto truth = io::read_truth((fs::path(data_dir) / "truth.csv").string());
    truth.resize(files.size());

    std::vector<std::pair<Tensor, GroundTruthFrame>> dataset;
    dataset.reserve(files.size());
    for (std::size_t f = 0; f < files.size(); ++f)
        dataset.emplace_back(rd::three_channel(rd::read_rdm(files[f])), truth[f]);

    const nn::TrainResult result = nn::train(dataset, cfg);
    nn::write_weights(result.weights, out_weights);

    std::ostringstream os;
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        os << e << "," << result.epoch_loss[e] << "\n";
    io::write_text_file(out_weights + ".loss.csv", os.str());
}

void cmd_track(const std::string& detections_csv, const std::string& config_path,
               const std::string& out_csv, const TrackOptions& opt) {
    const ScenarioConfig cfg = io::load_scenario(config_path);
    const auto frames = io::read_detections_csv(detections_csv);

    const bool embed = !opt.data_dir.empty();
    std::vector<std::string> files;
    assoc::EmbedWeights embed_w;
    if (embed) {
        files = list_rdm_frames(opt.data_dir);
        embed_w = assoc::EmbedWeights::seeded();
    }

    track::MotionModel motion;
    motion.delta_t = cfg.radar.frame_period_s;
    motion.q_s = opt.q_s;
    motion.sigma_r = opt.sigma_r;
    motion.sigma_v = opt.sigma_v;
    track::TrackerConfig tcfg = opt.tracker;
    tcfg.fixed_r = opt.fixed_r;
    tcfg.position_only = opt.position_only;
    track::Tracker tracker(motion, tcfg);

    std::vector<io::TrackRow> rows;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        std::optional<rd::RDTensor> tensor;
        if (embed && f < files.size()) tensor = rd::three_channel(rd::read_rdm(files[f]));

        std::vector<track::Measurement> meas;
        for (const auto& d : frames[f]) {
            const auto [range_m, velocity_mps] = rd::phys_of(d.range_bin, d.doppler_bin, cfg.radar);
            track::Measurement z;
            z.range_m = range_m;
            z.velocity_mps = velocity_mps;
            z.confidence = d.confidence;
            if (d.feature) {
                z.has_feature = true;
                z.feature = *d.feature;
            } else if (tensor) {
                z.has_feature = true;
                z.feature = assoc::embed_patch(*tensor, d, embed_w);
            }
            meas.push_back(z);
        }

        const auto step = tracker.step(meas);
        for (const auto& t : step.tracks)
            rows.push_back({static_cast<int>(f), t.id, track::to_string(t.status), t.state.x,
                            t.state.y, t.cov.a, t.cov.b, t.cov.d});
    }
    io::write_tracks_csv(out_csv, rows);
}

EvalSummary cmd_eval(const std::string& detections_csv, const std::string& truth_path,
                     const std::string& config_path, const std::string& out_csv,
                     const EvalOptions& opt) {
    const ScenarioConfig cfg = io::load_scenario(config_path);
    auto dets = io::read_detections_csv(detections_csv);
    auto truth = io::read_truth(truth_path);
    const std::size_t n_frames = std::max(dets.size(), truth.size());
    dets.resize(n_frames);
    truth.resize(n_frames);

    std::vector<io::TrackRow> track_rows;
    if (!opt.tracks_csv.empty()) track_rows = io::read_tracks_csv(opt.tracks_csv);

    const std::size_t grid_cells =
        static_cast<size_t>(cfg.radar.num_samples) * cfg.radar.num_pulses;
    const eval::OspaParams ospa_params{opt.ospa_cutoff, opt.ospa_order};

    std::vector<io::MetricRow> rows;
    EvalSummary summary;
    for (std::size_t f = 0; f < n_frames; ++f) {
        const auto pp =
            eval::pd_pfa(dets[f], truth[f], opt.tol_range, opt.tol_doppler, grid_cells);
        io::MetricRow row;
        row.frame = static_cast<int>(f);
        row.pd = pp.pd;
        row.pfa = pp.pfa;
        if (!opt.tracks_csv.empty()) {
            std::vector<std::vector<double>> x, y;
            for (const auto& tr : track_rows)
                if (tr.frame == static_cast<int>(f) && tr.status == "confirmed")
                    x.push_back({tr.range});
            for (const auto& e : truth[f].entries)
                y.push_back({rd::phys_of(e.range_bin, e.doppler_bin, cfg.radar).first});
            row.ospa = eval::ospa(x, y, ospa_params);
        }
        rows.push_back(row);
        summary.mean_pd += row.pd;
        summary.mean_pfa += row.pfa;
        summary.mean_ospa += row.ospa;
    }
    if (n_frames) {
        summary.mean_pd /= static_cast<double>(n_frames);
        summary.mean_pfa /= static_cast<double>(n_frames);
        summary.mean_ospa /= static_cast<double>(n_frames);
    }
    io::write_metrics_csv(out_csv, rows);
    return summary;
}

void RunManifest::validate() const {
    if (scenario.empty() || !fs::exists(scenario))
        throw ConfigError("manifest: scenario file does not exist: " + scenario);
    if (seeds.empty()) throw ConfigError("manifest: at least one seed required");
    if (detector == "neural" && (weights_path.empty() || !fs::exists(weights_path)))
        throw ConfigError("manifest: neural detector needs an existing weights file");
}

RunManifest parse_manifest(const std::string& text) {
    RunManifest m;
    std::stringstream ss(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line;
        {
            const auto b = raw.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) continue;
            const auto e = raw.find_last_not_of(" \t\r\n");
            line = raw.substr(b, e - b + 1);
        }
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("manifest line " + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section != "e2e")
            throw ConfigError("manifest line " + std::to_string(line_no) + ": unknown section");
        if (key == "scenario") m.scenario = value;
        else if (key == "detector") m.detector = value;
        else if (key == "out") m.out_dir = value;
        else if (key == "weights") m.weights_path = value;
        else if (key == "conf_threshold") m.conf_threshold = std::stod(value);
        else if (key == "pfa") m.pfa = std::stod(value);
        else if (key == "fixed_r") m.fixed_r = std::stod(value) != 0;
        else if (key == "position_only") m.position_only = std::stod(value) != 0;
        else if (key == "seeds" || key == "snr_db") {
            std::stringstream vs(value);
            std::string part;
            while (std::getline(vs, part, ',')) {
                if (key == "seeds")
                    m.seeds.push_back(static_cast<std::uint64_t>(std::stoull(trim(part))));
                else
                    m.snr_db_list.push_back(std::stod(trim(part)));
            }
        } else {
            throw ConfigError("manifest line " + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    return m;
}

RunManifest load_manifest(const std::string& path) {
    return parse_manifest(io::read_text_file(path));
}

namespace {

/// Measurement-level tracking comparison for one seed; OSPA on range per frame.
void run_tracking_pair(const ScenarioConfig& base, std::uint64_t seed, bool ablate_fixed_r,
                       bool ablate_position_only, std::vector<double>& ospa_full,
                       std::vector<double>& ospa_base) {
    ScenarioConfig cfg = base;
    cfg.seed = seed;

    track::MotionModel motion;
    motion.delta_t = cfg.radar.frame_period_s;
    track::TrackerConfig full_cfg;
    track::TrackerConfig base_cfg;
    base_cfg.fixed_r = ablate_fixed_r;
    base_cfg.position_only = ablate_position_only;
    track::Tracker full(motion, full_cfg);
    track::Tracker baseline(motion, base_cfg);

    const eval::OspaParams params{5.0, 1.0};
    auto targets = cfg.targets;
    for (int f = 0; f < cfg.frames; ++f) {
        if (f > 0) targets = sim::propagate_targets(targets, cfg.radar.frame_period_s);
        const auto dets = sim::gen_measurement_frame(cfg, targets, f);
        std::vector<track::Measurement> meas;
        for (const auto& d : dets) {
            const auto [range_m, velocity_mps] = rd::phys_of(d.range_bin, d.doppler_bin, cfg.radar);
            track::Measurement z;
            z.range_m = range_m;
            z.velocity_mps = velocity_mps;
            z.confidence = d.confidence;
            if (d.feature) {
                z.has_feature = true;
                z.feature = *d.feature;
            }
            meas.push_back(z);
        }
        std::vector<std::vector<double>> truth_pts;
        for (const auto& t : targets) truth_pts.push_back({t.range_m});

        for (int variant = 0; variant < 2; ++variant) {
            track::Tracker& trk = variant == 0 ? full : baseline;
            const auto step = trk.step(meas);
            std::vector<std::vector<double>> est;
            for (const auto& t : step.tracks)
                if (t.status == track::TrackStatus::kConfirmed) est.push_back({t.state.x});
            (variant == 0 ? ospa_full : ospa_base).push_back(eval::ospa(est, truth_pts, params));
        }
    }
}

}  // namespace

void cmd_e2e(const std::string& manifest_path) {
    const RunManifest m = load_manifest(manifest_path);
    m.validate();
    const std::string out = resolve_out_dir(m.out_dir);
    fs::create_directories(out);

    const ScenarioConfig base_cfg = io::load_scenario(m.scenario);

    // ---- detection sweep: Pd / Pfa vs SNR ----
    std::vector<double> snrs = m.snr_db_list;
    if (snrs.empty()) snrs.push_back(base_cfg.snr_db);
    std::vector<double> pd_mean(snrs.size(), 0.0), pfa_mean(snrs.size(), 0.0);

    for (std::uint64_t seed : m.seeds) {
        for (std::size_t si = 0; si < snrs.size(); ++si) {
            char nb[64];
            std::snprintf(nb, sizeof(nb), "seed_%llu/snr_%+.1f",
                          static_cast<unsigned long long>(seed), snrs[si]);
            const std::string dir = (fs::path(out) / nb).string();
            SimulateOverrides ov;
            ov.seed = seed;
            ov.snr_db = snrs[si];
            cmd_simulate(m.scenario, dir, ov);

            DetectOptions dopt;
            dopt.detector = m.detector;
            dopt.pfa = m.pfa;
            dopt.conf_threshold = m.conf_threshold;
            dopt.weights_path = m.weights_path;
            const std::string det_csv = (fs::path(dir) / "detections.csv").string();
            cmd_detect(dir, det_csv, dopt);

            EvalOptions eopt;
            const auto summary =
                cmd_eval(det_csv, (fs::path(dir) / "truth.csv").string(),
                         (fs::path(dir) / "scenario.cfg").string(),
                         (fs::path(dir) / "metrics.csv").string(), eopt);
            pd_mean[si] += summary.mean_pd / static_cast<double>(m.seeds.size());
            pfa_mean[si] += summary.mean_pfa / static_cast<double>(m.seeds.size());
        }
    }

    {
        std::ostringstream os;
        os << "snr_db,pd,pfa\n";
        for (std::size_t i = 0; i < snrs.size(); ++i)
            os << snrs[i] << "," << pd_mean[i] << "," << pfa_mean[i] << "\n";
        io::write_text_file((fs::path(out) / "pd_vs_snr.csv").string(), os.str());
    }

    // ---- measurement-level tracking: full vs ablated, OSPA vs time ----
    std::vector<std::vector<double>> per_seed_full, per_seed_base;
    std::ostringstream agg;
    agg << "seed,frame,ospa_full,ospa_baseline\n";
    for (std::uint64_t seed : m.seeds) {
        std::vector<double> f, b;
        run_tracking_pair(base_cfg, seed, m.fixed_r, m.position_only, f, b);
        for (std::size_t i = 0; i < f.size(); ++i)
            agg << seed << "," << i << "," << f[i] << "," << b[i] << "\n";
        per_seed_full.push_back(std::move(f));
        per_seed_base.push_back(std::move(b));
    }
    io::write_text_file((fs::path(out) / "aggregate_ospa.csv").string(), agg.str());

    {
        std::ostringstream os;
        os << "frame,ospa_full,ospa_baseline\n";
        for (int f = 0; f < base_cfg.frames; ++f) {
            double mf = 0.0, mb = 0.0;
            for (std::size_t s = 0; s < per_seed_full.size(); ++s) {
                mf += per_seed_full[s][f];
                mb += per_seed_base[s][f];
            }
            mf /= static_cast<double>(per_seed_full.size());
            mb /= static_cast<double>(per_seed_base.size());
            os << f << "," << mf << "," << mb << "\n";
        }
        io::write_text_file((fs::path(out) / "ospa_vs_time.csv").string(), os.str());
    }

    // Plots are rendered from the CSVs just written, never from live state.
    {
        std::istringstream is(io::read_text_file((fs::path(out) / "pd_vs_snr.csv").string()));
        std::string line;
        std::getline(is, line);
        io::PlotSeries pd{"pd", {}}, pfa{"pfa", {}};
        while (std::getline(is, line)) {
            double s, p, fa;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &s, &p, &fa) == 3) {
                pd.points.emplace_back(s, p);
                pfa.points.emplace_back(s, fa);
            }
        }
        io::write_svg_plot((fs::path(out) / "pd_vs_snr.svg").string(), "Detection rate vs SNR",
                           "SNR (dB)", "rate", {pd, pfa});
    }
    {
        std::istringstream is(io::read_text_file((fs::path(out) / "ospa_vs_time.csv").string()));
        std::string line;
        std::getline(is, line);
        io::PlotSeries full{"full", {}}, base{"baseline", {}};
        while (std::getline(is, line)) {
            double f, a, b;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &f, &a, &b) == 3) {
                full.points.emplace_back(f, a);
                base.points.emplace_back(f, b);
            }
        }
        io::write_svg_plot((fs::path(out) / "ospa_vs_time.svg").string(), "OSPA vs time",
                           "frame", "OSPA (m)", {full, base});
    }
}

}  // namespace rdtrack::cli
