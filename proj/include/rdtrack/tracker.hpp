#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rdtrack/hungarian.hpp"
#include "rdtrack/types.hpp"

namespace rdtrack::track {

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
};

struct Mat2 {
    // [[a, b], [c, d]]
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 diag(double m00, double m11) { return {m00, 0.0, 0.0, m11}; }

    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 transpose() const { return {a, c, b, d}; }
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        const double dt = det();
        if (!(std::abs(dt) > 1e-300)) throw NumericError("Mat2: singular matrix");
        const double inv = 1.0 / dt;
        return {d * inv, -b * inv, -c * inv, a * inv};
    }
    Mat2 symmetrized() const {
        const double off = 0.5 * (b + c);
        return {a, off, off, d};
    }
};

/// Constant-velocity model in (range, radial velocity) space.
struct MotionModel {
    double delta_t = 0.2;    // s
    double q_s = 0.2;        // process noise intensity, m^2/s^3
    double sigma_r = 0.6;    // measurement std, m
    double sigma_v = 0.2;    // measurement std, m/s

    Mat2 F() const { return {1.0, delta_t, 0.0, 1.0}; }
    Mat2 H() const { return Mat2::identity(); }
    Mat2 Q() const {
        const double dt = delta_t;
        return Mat2{dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt} * q_s;
    }
    Mat2 R() const { return Mat2::diag(sigma_r * sigma_r, sigma_v * sigma_v); }
};

enum class TrackStatus { kTentative, kConfirmed, kDeleted };

inline const char* to_string(TrackStatus s) {
    switch (s) {
        case TrackStatus::kTentative: return "tentative";
        case TrackStatus::kConfirmed: return "confirmed";
        case TrackStatus::kDeleted: return "deleted";
    }
    return "?";
}

struct Track {
    std::uint64_t id = 0;
    Vec2 state;      // (range m, velocity m/s)
    Mat2 cov;        // P, kept symmetric PSD
    FeatureVec feature{};
    TrackStatus status = TrackStatus::kTentative;
    int hits = 0;
    int misses = 0;  // consecutive
    int age = 0;
};

struct TrackerConfig {
    double mu = 0.3;                  // weight on motion distance in the combined cost
    double ema_alpha = 0.7;
    double gate = 9.2103;             // chi-square 0.99 quantile, 2 dof
    int confirm_hits = 2;
    int max_misses = 3;
    double init_confidence_min = 0.3;
    double cakf_factor_cap = 10.0;
    bool fixed_r = false;             // ablation: disable confidence-adaptive R
    bool position_only = false;       // ablation: cost from motion distance alone

    void validate() const {
        if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("tracker: mu must be in [0,1]");
        if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0))
            throw ConfigError("tracker: alpha must be in [0,1]");
        if (!(gate > 0.0)) throw ConfigError("tracker: gate must be > 0");
    }
};

/// Measurement-space input to one tracker step.
struct Measurement {
    double range_m = 0.0;
    double velocity_mps = 0.0;
    double confidence = 0.0;
    bool has_feature = false;
    FeatureVec feature{};
};

// Eq.-style confidence-adaptive scaling: R_hat = (n / (2*sum(c))) * R, factor
// clamped to [1/cap, cap]; empty confidence list leaves R unchanged.
Mat2 cakf_scale(const Mat2& r, const std::vector<double>& confidences, double factor_cap = 10.0);

Track kf_predict(const Track& t, const MotionModel& m);

/// Standard update with S = H P- H^T + R_hat, Joseph-form covariance.
Track kf_update(const Track& t, const Vec2& z, const MotionModel& m, const Mat2& r_hat);

/// Squared Mahalanobis distance of z from the track's predicted measurement.
double mahalanobis2(const Vec2& z, const Track& t, const MotionModel& m, const Mat2& s);

inline double combined_cost(double d1, double d2, double mu) {
    return mu * d1 + (1.0 - mu) * d2;
}

struct AssignmentResult {
    std::vector<std::pair<int, int>> pairs;  // (row/track, col/detection)
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

/// Minimum-cost assignment over feasible pairs. Infeasible pairs are marked
/// with +infinity in the gating mask and never appear in the result.
AssignmentResult assign(const CostMatrix& cost);

struct TrackEvent {
    enum class Kind { kCreated, kConfirmed, kDeleted } kind;
    std::uint64_t track_id;
};

struct StepResult {
    std::vector<Track> tracks;  // live tracks after the step
    std::vector<TrackEvent> events;
};

class Tracker {
  public:
    Tracker(MotionModel m, TrackerConfig cfg) : model_(m), cfg_(cfg) { cfg_.validate(); }

    /// Advance one frame: adapt R, predict, gate + associate (combined motion
    /// and feature cost), update matched tracks, manage lifecycle.
    StepResult step(const std::vector<Measurement>& measurements);

    const std::vector<Track>& tracks() const { return tracks_; }
    const MotionModel& model() const { return model_; }

  private:
    MotionModel model_;
    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    std::uint64_t next_id_ = 1;
};

}  // namespace rdtrack::track
