// Command-line front end: simulate | detect | train | track | eval | e2e.
// Exit codes: 0 ok, 1 config error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "rdtrack/cli_commands.hpp"

using namespace rdtrack;

int main(int argc, char** argv) {
    CLI::App app{"Range-Doppler radar detection and tracking workbench"};
    app.require_subcommand(1);

    std::string config, out, detections, truth, tracks, weights, data_dir, manifest;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double snr_db = 0.0;
    bool snr_set = false;

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate RD frames + truth from a scenario");
    sim_cmd->add_option("--config", config, "scenario file")->required();
    sim_cmd->add_option("--out", out, "output directory");
    sim_cmd->add_option("--seed", seed, "override scenario seed")->each([&](const std::string&) {
        seed_set = true;
    });
    sim_cmd->add_option("--snr-db", snr_db, "override scenario SNR")->each([&](const std::string&) {
        snr_set = true;
    });

    // detect
    cli::DetectOptions dopt;
    auto* det_cmd = app.add_subcommand("detect", "Run a detector over simulated RD frames");
    det_cmd->add_option("--data", data_dir, "directory from simulate")->required();
    det_cmd->add_option("--out", out, "output CSV path")->required();
    det_cmd->add_option("--detector", dopt.detector, "cfar | montecarlo | neural");
    det_cmd->add_option("--pfa", dopt.pfa, "design false-alarm probability");
    det_cmd->add_option("--conf-threshold", dopt.conf_threshold, "neural decode threshold");
    det_cmd->add_option("--weights", dopt.weights_path, "neural weight file");
    det_cmd->add_option("--cfar-train", dopt.cfar.train_cells, "training cells per side");
    det_cmd->add_option("--cfar-guard", dopt.cfar.guard_cells, "guard cells per side");
    det_cmd->add_option("--dbscan-eps", dopt.dbscan_eps, "cluster radius (0 = off)");
    det_cmd->add_option("--dbscan-min-pts", dopt.dbscan_min_pts, "min neighborhood count");

    // train
    nn::TrainConfig tcfg;
    auto* train_cmd = app.add_subcommand("train", "Train the neural detector on simulated frames");
    train_cmd->add_option("--data", data_dir, "directory from simulate")->required();
    train_cmd->add_option("--out", out, "output weight file")->required();
    train_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
    train_cmd->add_option("--batch", tcfg.batch_size, "batch size");
    train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
    train_cmd->add_option("--seed", tcfg.seed, "training seed");

    // track
    cli::TrackOptions kopt;
    auto* track_cmd = app.add_subcommand("track", "Track detections through the Kalman pipeline");
    track_cmd->add_option("--detections", detections, "detection CSV")->required();
    track_cmd->add_option("--config", config, "scenario file (radar geometry)")->required();
    track_cmd->add_option("--out", out, "output track CSV")->required();
    track_cmd->add_option("--data", kopt.data_dir, "RDM directory for feature embedding");
    track_cmd->add_flag("--fixed-r", kopt.fixed_r, "disable confidence-adaptive R");
    track_cmd->add_flag("--position-only", kopt.position_only, "ignore feature distances");
    track_cmd->add_option("--gate", kopt.tracker.gate, "squared Mahalanobis gate");
    track_cmd->add_option("--mu", kopt.tracker.mu, "motion weight in the combined cost");

    // eval
    cli::EvalOptions eopt;
    auto* eval_cmd = app.add_subcommand("eval", "Score detections (and tracks) against truth");
    eval_cmd->add_option("--detections", detections, "detection CSV")->required();
    eval_cmd->add_option("--truth", truth, "truth file")->required();
    eval_cmd->add_option("--config", config, "scenario file")->required();
    eval_cmd->add_option("--out", out, "metrics CSV")->required();
    eval_cmd->add_option("--tracks", eopt.tracks_csv, "track CSV (enables OSPA)");
    eval_cmd->add_option("--ospa-c", eopt.ospa_cutoff, "OSPA cutoff");
    eval_cmd->add_option("--ospa-p", eopt.ospa_order, "OSPA order");

    // e2e
    auto* e2e_cmd = app.add_subcommand("e2e", "Run a full manifest-driven experiment");
    e2e_cmd->add_option("--manifest", manifest, "experiment manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            cli::SimulateOverrides ov;
            if (seed_set) ov.seed = seed;
            if (snr_set) ov.snr_db = snr_db;
            cli::cmd_simulate(config, cli::resolve_out_dir(out), ov);
        } else if (det_cmd->parsed()) {
            cli::cmd_detect(data_dir, out, dopt);
        } else if (train_cmd->parsed()) {
            cli::cmd_train(data_dir, out, tcfg);
        } else if (track_cmd->parsed()) {
            cli::cmd_track(detections, config, out, kopt);
        } else if (eval_cmd->parsed()) {
            const auto s = cli::cmd_eval(detections, truth, config, out, eopt);
            std::printf("mean_pd=%.6f mean_pfa=%.3e mean_ospa=%.4f\n", s.mean_pd, s.mean_pfa,
                        s.mean_ospa);
        } else if (e2e_cmd->parsed()) {
            cli::cmd_e2e(manifest);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
