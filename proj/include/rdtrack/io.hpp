#pragma once

#include <map>
#include <string>
#include <vector>

#include "rdtrack/types.hpp"

namespace rdtrack::io {

// Scenario text format: `key = value` lines under [radar] / [targets] /
// [clutter] / [run] headers; targets as `target = range,velocity,amplitude`.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);
std::string format_scenario(const ScenarioConfig& cfg);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

// Detections CSV: header `frame,range_bin,doppler_bin,confidence,energy`.
void write_detections_csv(const std::string& path,
                          const std::vector<std::vector<Detection>>& per_frame);
std::vector<std::vector<Detection>> read_detections_csv(const std::string& path);

// Truth lines `frame_index,range_bin,doppler_bin` (no header).
void write_truth(const std::string& path, const std::vector<GroundTruthFrame>& frames);
std::vector<GroundTruthFrame> read_truth(const std::string& path);

struct TrackRow {
    int frame = 0;
    std::uint64_t track_id = 0;
    std::string status;
    double range = 0.0, velocity = 0.0;
    double p00 = 0.0, p01 = 0.0, p11 = 0.0;
};

// Tracks CSV: header `frame,track_id,status,range,velocity,p00,p01,p11`.
void write_tracks_csv(const std::string& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_tracks_csv(const std::string& path);

struct MetricRow {
    int frame = 0;
    double pd = 0.0, pfa = 0.0, ospa = 0.0;
};

// Metrics CSV: header `frame,pd,pfa,ospa`.
void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows);

/// One polyline per series; minimal static SVG with axes and tick labels.
struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rdtrack::io
