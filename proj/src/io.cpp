#include "rdtrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rdtrack::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, int line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

std::vector<double> parse_tuple(const std::string& s, int line_no) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(parse_number(trim(part), line_no));
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    ScenarioConfig cfg;
    cfg.targets.clear();
    std::stringstream ss(text);
    std::string raw;
    std::string section;
    bool have_radar = false, have_run = false;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section == "radar") have_radar = true;
            if (section == "run") have_run = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto num = [&] { return parse_number(value, line_no); };
        auto pair_of = [&]() -> Interval {
            const auto t = parse_tuple(value, line_no);
            if (t.size() != 2)
                throw ConfigError("line " + std::to_string(line_no) + ": expected lo,hi");
            return {t[0], t[1]};
        };

        if (section == "radar") {
            if (key == "f0") cfg.radar.carrier_hz = num();
            else if (key == "B") cfg.radar.bandwidth_hz = num();
            else if (key == "T") cfg.radar.pulse_width_s = num();
            else if (key == "L") cfg.radar.num_pulses = static_cast<int>(num());
            else if (key == "M") cfg.radar.num_samples = static_cast<int>(num());
            else if (key == "fs") cfg.radar.sample_rate_hz = num();
            else if (key == "delta_t") cfg.radar.frame_period_s = num();
            else throw ConfigError("line " + std::to_string(line_no) + ": unknown radar key '" + key + "'");
        } else if (section == "targets") {
            if (key != "target")
                throw ConfigError("line " + std::to_string(line_no) + ": unknown targets key '" + key + "'");
            const auto t = parse_tuple(value, line_no);
            if (t.size() != 3)
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": target needs range,velocity,amplitude");
            cfg.targets.push_back({t[0], t[1], t[2]});
        } else if (section == "clutter") {
            if (key == "rate") cfg.clutter_rate = num();
            else if (key == "range") cfg.clutter_range_m = pair_of();
            else if (key == "velocity") cfg.clutter_velocity_mps = pair_of();
            else if (key == "conf") cfg.clutter_conf = pair_of();
            else throw ConfigError("line " + std::to_string(line_no) + ": unknown clutter key '" + key + "'");
        } else if (section == "run") {
            if (key == "snr_db") cfg.snr_db = num();
            else if (key == "frames") cfg.frames = static_cast<int>(num());
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
            else if (key == "noiseless") cfg.noiseless = num() != 0.0;
            else if (key == "target_conf") cfg.target_conf = pair_of();
            else throw ConfigError("line " + std::to_string(line_no) + ": unknown run key '" + key + "'");
        } else if (section.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown section '" + section + "'");
        }
    }
    if (!have_radar) throw ConfigError("scenario: missing [radar] section");
    if (!have_run) throw ConfigError("scenario: missing [run] section");
    // Default the waveform timing when the file leaves it out: fs = B and a
    // chirp over half the receive window.
    if (cfg.radar.sample_rate_hz == 0.0) cfg.radar.sample_rate_hz = cfg.radar.bandwidth_hz;
    if (cfg.radar.pulse_width_s == 0.0)
        cfg.radar.pulse_width_s = 0.5 * cfg.radar.num_samples / cfg.radar.sample_rate_hz;
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

std::string format_scenario(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "[radar]\n";
    os << "f0 = " << fmt(cfg.radar.carrier_hz) << "\n";
    os << "B = " << fmt(cfg.radar.bandwidth_hz) << "\n";
    os << "T = " << fmt(cfg.radar.pulse_width_s) << "\n";
    os << "L = " << cfg.radar.num_pulses << "\n";
    os << "M = " << cfg.radar.num_samples << "\n";
    os << "fs = " << fmt(cfg.radar.sample_rate_hz) << "\n";
    os << "delta_t = " << fmt(cfg.radar.frame_period_s) << "\n";
    os << "\n[targets]\n";
    for (const auto& t : cfg.targets)
        os << "target = " << fmt(t.range_m) << "," << fmt(t.velocity_mps) << ","
           << fmt(t.amplitude) << "\n";
    os << "\n[clutter]\n";
    os << "rate = " << fmt(cfg.clutter_rate) << "\n";
    os << "range = " << fmt(cfg.clutter_range_m.lo) << "," << fmt(cfg.clutter_range_m.hi) << "\n";
    os << "velocity = " << fmt(cfg.clutter_velocity_mps.lo) << ","
       << fmt(cfg.clutter_velocity_mps.hi) << "\n";
    os << "conf = " << fmt(cfg.clutter_conf.lo) << "," << fmt(cfg.clutter_conf.hi) << "\n";
    os << "\n[run]\n";
    os << "snr_db = " << fmt(cfg.snr_db) << "\n";
    os << "frames = " << cfg.frames << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "noiseless = " << (cfg.noiseless ? 1 : 0) << "\n";
    os << "target_conf = " << fmt(cfg.target_conf.lo) << "," << fmt(cfg.target_conf.hi) << "\n";
    return os.str();
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    write_text_file(path, format_scenario(cfg));
}

void write_detections_csv(const std::string& path,
                          const std::vector<std::vector<Detection>>& per_frame) {
    std::ostringstream os;
    os << "frame,range_bin,doppler_bin,confidence,energy\n";
    for (std::size_t f = 0; f < per_frame.size(); ++f)
        for (const auto& d : per_frame[f])
            os << f << "," << fmt(d.range_bin) << "," << fmt(d.doppler_bin) << ","
               << fmt(d.confidence) << "," << fmt(d.energy) << "\n";
    write_text_file(path, os.str());
}

std::vector<std::vector<Detection>> read_detections_csv(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) || trim(line) != "frame,range_bin,doppler_bin,confidence,energy")
        throw DataError("read_detections_csv: bad header in " + path);
    std::vector<std::vector<Detection>> frames;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto t = parse_tuple(line, line_no);
        if (t.size() != 5) throw DataError("read_detections_csv: bad row in " + path);
        const int frame = static_cast<int>(t[0]);
        if (frame < 0) throw DataError("read_detections_csv: negative frame in " + path);
        if (static_cast<std::size_t>(frame) >= frames.size()) frames.resize(frame + 1);
        Detection d;
        d.range_bin = t[1];
        d.doppler_bin = t[2];
        d.confidence = t[3];
        d.energy = t[4];
        frames[frame].push_back(d);
    }
    return frames;
}

void write_truth(const std::string& path, const std::vector<GroundTruthFrame>& frames) {
    std::ostringstream os;
    for (std::size_t f = 0; f < frames.size(); ++f)
        for (const auto& e : frames[f].entries)
            os << f << "," << fmt(e.range_bin) << "," << fmt(e.doppler_bin) << "\n";
    write_text_file(path, os.str());
}

std::vector<GroundTruthFrame> read_truth(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    std::vector<GroundTruthFrame> frames;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto t = parse_tuple(line, line_no);
        if (t.size() != 3) throw DataError("read_truth: bad row in " + path);
        const int frame = static_cast<int>(t[0]);
        if (frame < 0) throw DataError("read_truth: negative frame in " + path);
        if (static_cast<std::size_t>(frame) >= frames.size()) frames.resize(frame + 1);
        frames[frame].entries.push_back({t[1], t[2]});
    }
    return frames;
}

void write_tracks_csv(const std::string& path, const std::vector<TrackRow>& rows) {
    std::ostringstream os;
    os << "frame,track_id,status,range,velocity,p00,p01,p11\n";
    for (const auto& r : rows)
        os << r.frame << "," << r.track_id << "," << r.status << "," << fmt(r.range) << ","
           << fmt(r.velocity) << "," << fmt(r.p00) << "," << fmt(r.p01) << "," << fmt(r.p11)
           << "\n";
    write_text_file(path, os.str());
}

std::vector<TrackRow> read_tracks_csv(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) ||
        trim(line) != "frame,track_id,status,range,velocity,p00,p01,p11")
        throw DataError("read_tracks_csv: bad header in " + path);
    std::vector<TrackRow> rows;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, ',')) parts.push_back(trim(part));
        if (parts.size() != 8) throw DataError("read_tracks_csv: bad row in " + path);
        TrackRow r;
        r.frame = static_cast<int>(parse_number(parts[0], line_no));
        r.track_id = static_cast<std::uint64_t>(parse_number(parts[1], line_no));
        r.status = parts[2];
        r.range = parse_number(parts[3], line_no);
        r.velocity = parse_number(parts[4], line_no);
        r.p00 = parse_number(parts[5], line_no);
        r.p01 = parse_number(parts[6], line_no);
        r.p11 = parse_number(parts[7], line_no);
        rows.push_back(r);
    }
    return rows;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRow>& rows) {
    std::ostringstream os;
    os << "frame,pd,pfa,ospa\n";
    for (const auto& r : rows)
        os << r.frame << "," << fmt(r.pd) << "," << fmt(r.pfa) << "," << fmt(r.ospa) << "\n";
    write_text_file(path, os.str());
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
    constexpr int kW = 720, kH = 480, kMargin = 60;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!(x_max > x_min)) { x_max = x_min + 1; x_min -= 1; }
    if (!(y_max > y_min)) { y_max = y_min + 1; y_min -= 1; }

    auto px = [&](double x) {
        return kMargin + (x - x_min) / (x_max - x_min) * (kW - 2 * kMargin);
    };
    auto py = [&](double y) {
        return kH - kMargin - (y - y_min) / (y_max - y_min) * (kH - 2 * kMargin);
    };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n";
    // axes
    os << "<line x1=\"" << kMargin << "\" y1=\"" << kH - kMargin << "\" x2=\"" << kW - kMargin
       << "\" y2=\"" << kH - kMargin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
       << kH - kMargin << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << kH - kMargin + 18
           << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(std::round(xv * 1000) / 1000)
           << "</text>\n";
        os << "<text x=\"" << kMargin - 8 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(std::round(yv * 1000) / 1000)
           << "</text>\n";
    }
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 14
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    os << "<text x=\"18\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << kH / 2 << ")\">" << y_label << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[s].points) os << px(x) << "," << py(y) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << kW - kMargin + 4 << "\" y=\"" << kMargin + 16 * s + 12
           << "\" font-size=\"11\" fill=\"" << color << "\">" << series[s].label << "</text>\n";
    }
    os << "</svg>\n";
    write_text_file(path, os.str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << content;
    if (!f) throw DataError("short write to " + path);
}

}  // namespace rdtrack::io
