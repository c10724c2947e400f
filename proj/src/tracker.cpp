#include "rdtrack/tracker.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rdtrack/assoc_features.hpp"

namespace rdtrack::track {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

FeatureVec basis_e1() {
    FeatureVec f{};
    f[0] = 1.0;
    return f;
}
}  // namespace

Mat2 cakf_scale(const Mat2& r, const std::vector<double>& confidences, double factor_cap) {
    if (confidences.empty()) return r;
    double sum = 0.0;
    for (double c : confidences) sum += c;
    double factor = static_cast<double>(confidences.size()) / (2.0 * sum);
    factor = std::clamp(factor, 1.0 / factor_cap, factor_cap);
    return r * factor;
}

Track kf_predict(const Track& t, const MotionModel& m) {
    Track out = t;
    const Mat2 f = m.F();
    out.state = f * t.state;
    out.cov = (f * t.cov * f.transpose() + m.Q()).symmetrized();
    return out;
}

Track kf_update(const Track& t, const Vec2& z, const MotionModel& m, const Mat2& r_hat) {
    const Mat2 h = m.H();
    const Mat2 s = (h * t.cov * h.transpose() + r_hat).symmetrized();
    const Mat2 s_inv = s.inverse();  // throws NumericError when singular
    const Mat2 k = t.cov * h.transpose() * s_inv;
    const Vec2 innovation = z - h * t.state;

    Track out = t;
    out.state = t.state + k * innovation;
    const Mat2 i_kh = Mat2::identity() - k * h;
    out.cov = (i_kh * t.cov * i_kh.transpose() + k * r_hat * k.transpose()).symmetrized();
    return out;
}

double mahalanobis2(const Vec2& z, const Track& t, const MotionModel& m, const Mat2& s) {
    const Vec2 v = z - m.H() * t.state;
    const Mat2 s_inv = s.inverse();
    const Vec2 sv = s_inv * v;
    return v.x * sv.x + v.y * sv.y;
}

AssignmentResult assign(const CostMatrix& cost) {
    AssignmentResult res;
    const int rows = cost.rows, cols = cost.cols;
    if (rows == 0 || cols == 0) {
        res.unmatched_rows.resize(rows);
        std::iota(res.unmatched_rows.begin(), res.unmatched_rows.end(), 0);
        res.unmatched_cols.resize(cols);
        std::iota(res.unmatched_cols.begin(), res.unmatched_cols.end(), 0);
        return res;
    }

    double max_finite = 0.0;
    for (double c : cost.cost)
        if (std::isfinite(c)) max_finite = std::max(max_finite, std::abs(c));
    const double sentinel = (max_finite + 1.0) * (std::min(rows, cols) + 1);

    CostMatrix padded = cost;
    for (double& c : padded.cost)
        if (!std::isfinite(c)) c = sentinel;

    const auto match = solve_assignment(padded);
    std::vector<char> col_used(cols, 0);
    for (int r = 0; r < rows; ++r) {
        const int c = match[r];
        if (c >= 0 && std::isfinite(cost.at(r, c))) {
            res.pairs.emplace_back(r, c);
            col_used[c] = 1;
        } else {
            res.unmatched_rows.push_back(r);
        }
    }
    for (int c = 0; c < cols; ++c)
        if (!col_used[c]) res.unmatched_cols.push_back(c);
    return res;
}

StepResult Tracker::step(const std::vector<Measurement>& measurements) {
    // Canonical measurement order so results do not depend on input order.
    std::vector<int> order(measurements.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Measurement &ma = measurements[a], &mb = measurements[b];
        if (ma.range_m != mb.range_m) return ma.range_m < mb.range_m;
        if (ma.velocity_mps != mb.velocity_mps) return ma.velocity_mps < mb.velocity_mps;
        if (ma.confidence != mb.confidence) return ma.confidence < mb.confidence;
        if (ma.has_feature != mb.has_feature) return mb.has_feature;
        return ma.feature < mb.feature;
    });
    std::vector<Measurement> meas;
    meas.reserve(measurements.size());
    for (int i : order) meas.push_back(measurements[i]);

    std::vector<double> confidences;
    confidences.reserve(meas.size());
    for (const auto& z : meas) confidences.push_back(z.confidence);
    const Mat2 r_hat =
        cfg_.fixed_r ? model_.R() : cakf_scale(model_.R(), confidences, cfg_.cakf_factor_cap);

    StepResult result;
    for (auto& t : tracks_) {
        t = kf_predict(t, model_);
        ++t.age;
    }

    const int n_tracks = static_cast<int>(tracks_.size());
    const int n_meas = static_cast<int>(meas.size());
    CostMatrix cost(n_tracks, n_meas, kInf);
    for (int j = 0; j < n_tracks; ++j) {
        const Mat2 s =
            (model_.H() * tracks_[j].cov * model_.H().transpose() + r_hat).symmetrized();
        for (int i = 0; i < n_meas; ++i) {
            const Vec2 z{meas[i].range_m, meas[i].velocity_mps};
            const double d1 = mahalanobis2(z, tracks_[j], model_, s);
            if (d1 > cfg_.gate) continue;
            if (cfg_.position_only) {
                cost.at(j, i) = d1;
            } else {
                const double d2 = meas[i].has_feature
                                      ? assoc::cosine_distance(meas[i].feature, tracks_[j].feature)
                                      : 1.0;
                cost.at(j, i) = combined_cost(d1, d2, cfg_.mu);
            }
        }
    }

    const AssignmentResult am = assign(cost);

    for (const auto& [j, i] : am.pairs) {
        Track& t = tracks_[j];
        const Vec2 z{meas[i].range_m, meas[i].velocity_mps};
        t = kf_update(t, z, model_, r_hat);
        if (meas[i].has_feature)
            t.feature = assoc::ema_update(t.feature, meas[i].feature, cfg_.ema_alpha);
        ++t.hits;
        t.misses = 0;
        if (t.status == TrackStatus::kTentative && t.hits >= cfg_.confirm_hits) {
            t.status = TrackStatus::kConfirmed;
            result.events.push_back({TrackEvent::Kind::kConfirmed, t.id});
        }
    }

    for (int j : am.unmatched_rows) {
        Track& t = tracks_[j];
        ++t.misses;
        if (t.misses >= cfg_.max_misses) {
            t.status = TrackStatus::kDeleted;
            result.events.push_back({TrackEvent::Kind::kDeleted, t.id});
        }
    }

    for (int i : am.unmatched_cols) {
        if (meas[i].confidence < cfg_.init_confidence_min) continue;
        Track t;
        t.id = next_id_++;
        t.state = {meas[i].range_m, meas[i].velocity_mps};
        t.cov = model_.R();
        t.feature = meas[i].has_feature ? meas[i].feature : basis_e1();
        t.hits = 1;
        t.age = 1;
        t.status = cfg_.confirm_hits <= 1 ? TrackStatus::kConfirmed : TrackStatus::kTentative;
        result.events.push_back({TrackEvent::Kind::kCreated, t.id});
        tracks_.push_back(t);
    }

    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::kDeleted; });
    result.tracks = tracks_;
    return result;
}

}  // namespace rdtrack::track
