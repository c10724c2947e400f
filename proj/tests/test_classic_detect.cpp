#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdtrack/classic_detect.hpp"
#include "rdtrack/rng.hpp"

using namespace rdtrack;

namespace {

rd::RDMatrix matrix_from_energies(const std::vector<std::vector<double>>& e) {
    rd::RDMatrix m(static_cast<int>(e.size()), static_cast<int>(e[0].size()), RadarParams{});
    for (std::size_t r = 0; r < e.size(); ++r)
        for (std::size_t d = 0; d < e[r].size(); ++d)
            m.at(static_cast<int>(r), static_cast<int>(d)) = cplx(std::sqrt(e[r][d]), 0.0);
    return m;
}

rd::RDMatrix exponential_noise(int rows, int cols, std::uint64_t seed) {
    // complex gaussian with unit energy -> exponential(1) cell energies
    RngStream rng(seed, 0, "cfar-noise");
    rd::RDMatrix m(rows, cols, RadarParams{});
    const double s = std::sqrt(0.5);
    for (auto& c : m.cells) c = cplx(s * rng.gaussian(), s * rng.gaussian());
    return m;
}

// Brute-force density-reachability closure (independent of the implementation).
std::vector<int> dbscan_oracle_labels(const std::vector<Detection>& pts, double eps,
                                      int min_pts) {
    const int n = static_cast<int>(pts.size());
    const double eps2 = eps * eps;
    auto d2 = [&](int i, int j) {
        const double dr = pts[i].range_bin - pts[j].range_bin;
        const double dd = pts[i].doppler_bin - pts[j].doppler_bin;
        return dr * dr + dd * dd;
    };
    std::vector<char> core(n, 0);
    for (int i = 0; i < n; ++i) {
        int cnt = 0;
        for (int j = 0; j < n; ++j)
            if (d2(i, j) <= eps2) ++cnt;
        core[i] = cnt >= min_pts;
    }
    std::vector<int> label(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        if (!core[i] || label[i] >= 0) continue;
        // closure over core-core adjacency
        std::vector<int> stack{i};
        label[i] = next;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v = 0; v < n; ++v) {
                if (!core[v] || label[v] >= 0 || d2(u, v) > eps2) continue;
                label[v] = next;
                stack.push_back(v);
            }
        }
        ++next;
    }
    for (int i = 0; i < n; ++i) {
        if (core[i] || label[i] >= 0) continue;
        double best = 1e300;
        int best_core = -1;
        for (int j = 0; j < n; ++j) {
            if (!core[j] || d2(i, j) > eps2) continue;
            const double dd = d2(i, j);
            if (dd < best ||
                (dd == best && std::pair(pts[j].range_bin, pts[j].doppler_bin) <
                                   std::pair(pts[best_core].range_bin,
                                             pts[best_core].doppler_bin))) {
                best = dd;
                best_core = j;
            }
        }
        if (best_core >= 0) label[i] = label[best_core];
    }
    return label;
}

std::vector<std::pair<double, double>> cluster_centroids(const std::vector<Detection>& out) {
    std::vector<std::pair<double, double>> c;
    for (const auto& d : out)
        if (!d.noise) c.emplace_back(d.range_bin, d.doppler_bin);
    std::sort(c.begin(), c.end());
    return c;
}

}  // namespace

TEST_CASE("cfar threshold on a constant training field is exactly alpha times the mean") {
    detect::CfarConfig cfg;
    cfg.train_cells = 2;
    cfg.guard_cells = 0;
    cfg.pfa_design = 1e-2;
    const double u = 2.0;

    std::vector<std::vector<double>> e(9, std::vector<double>(9, u));
    const int n_train = 24;  // full 5x5 window minus the cell under test
    const double alpha = n_train * (std::pow(cfg.pfa_design, -1.0 / n_train) - 1.0);

    SUBCASE("exactly at threshold does not fire") {
        e[4][4] = alpha * u;
        const auto dets = detect::ca_cfar(matrix_from_energies(e), cfg);
        CHECK(dets.empty());
    }
    SUBCASE("just above threshold fires exactly once") {
        e[4][4] = alpha * u * (1.0 + 1e-9);
        const auto dets = detect::ca_cfar(matrix_from_energies(e), cfg);
        REQUIRE(dets.size() == 1);
        CHECK(dets[0].range_bin == 4);
        CHECK(dets[0].doppler_bin == 4);
        CHECK(dets[0].confidence > 0.0);
        CHECK(dets[0].confidence < 1.0);
    }
}

TEST_CASE("cfar empirical false-alarm rate tracks the design value") {
    detect::CfarConfig cfg;
    cfg.train_cells = 4;
    cfg.guard_cells = 1;
    cfg.pfa_design = 1e-3;
    std::size_t cells = 0, alarms = 0;
    for (int trial = 0; trial < 2; ++trial) {
        const auto m = exponential_noise(1024, 512, 100 + trial);
        alarms += detect::ca_cfar(m, cfg).size();
        cells += m.cells.size();
    }
    const double pfa = static_cast<double>(alarms) / static_cast<double>(cells);
    CHECK(pfa > 0.75e-3);
    CHECK(pfa < 1.25e-3);
}

TEST_CASE("cfar detections are invariant to global energy scaling") {
    detect::CfarConfig cfg;
    cfg.train_cells = 3;
    cfg.guard_cells = 1;
    cfg.pfa_design = 5e-3;
    auto m = exponential_noise(128, 128, 7);
    const auto base = detect::ca_cfar(m, cfg);
    for (auto& c : m.cells) c *= 40.0;  // energies scale by 1600
    const auto scaled = detect::ca_cfar(m, cfg);
    REQUIRE(base.size() == scaled.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].range_bin == scaled[i].range_bin);
        CHECK(base[i].doppler_bin == scaled[i].doppler_bin);
    }
}

TEST_CASE("monte carlo threshold follows the order-statistic rule") {
    // perfect-square energies survive the sqrt/square round trip exactly
    SUBCASE("ten ordered energies with pfa 0.2 fire the top two") {
        std::vector<std::vector<double>> e = {{1, 4, 9, 16, 25}, {36, 49, 64, 81, 100}};
        const auto m = matrix_from_energies(e);
        const std::vector<char> mask(10, 0);
        const double thr = detect::monte_carlo_threshold(m, mask, 0.2);  // k = 2
        CHECK(thr == 64.0);
        const auto dets = detect::threshold_detect(m, thr);
        REQUIRE(dets.size() == 2);
        CHECK(dets[0].energy == 81.0);
        CHECK(dets[1].energy == 100.0);
    }
    SUBCASE("tiny pfa gives zero false alarms") {
        std::vector<std::vector<double>> e = {{1, 4, 9, 16, 25}, {36, 49, 64, 81, 100}};
        const auto m = matrix_from_energies(e);
        const std::vector<char> mask(10, 0);
        const double thr = detect::monte_carlo_threshold(m, mask, 0.05);  // k = 0
        CHECK(thr == 100.0);
        CHECK(detect::threshold_detect(m, thr).empty());
    }
    SUBCASE("false-alarm count is exactly floor(pfa*N) on random distinct energies") {
        RngStream rng(21, 0, "mc");
        for (int trial = 0; trial < 50; ++trial) {
            const int rows = 8, cols = 16;
            rd::RDMatrix m(rows, cols, RadarParams{});
            std::vector<char> mask(static_cast<size_t>(rows) * cols, 0);
            for (std::size_t i = 0; i < m.cells.size(); ++i) {
                m.cells[i] = cplx(std::sqrt(rng.uniform(0.01, 100.0)), 0.0);
                mask[i] = rng.uniform() < 0.2;  // some cells marked as target
            }
            const double pfa = rng.uniform(0.01, 0.5);
            std::vector<double> clutter;
            for (std::size_t i = 0; i < m.cells.size(); ++i)
                if (!mask[i]) clutter.push_back(std::norm(m.cells[i]));
            const auto expected_k =
                static_cast<std::size_t>(pfa * static_cast<double>(clutter.size()));
            const double thr = detect::monte_carlo_threshold(m, mask, pfa);
            // brute-force count over the sorted clutter energies
            std::size_t above = 0;
            for (double c : clutter)
                if (c > thr) ++above;
            CHECK(above == expected_k);
        }
    }
    SUBCASE("insufficient clutter cells is an error") {
        const auto m = matrix_from_energies({{1.0}});
        const std::vector<char> mask = {1};
        CHECK_THROWS_AS(detect::monte_carlo_threshold(m, mask, 0.1), DataError);
    }
}

TEST_CASE("threshold_detect boundary behavior") {
    const auto m = matrix_from_energies({{1, 2}, {3, 4}});
    CHECK(detect::threshold_detect(m, std::numeric_limits<double>::infinity()).empty());
    CHECK(detect::threshold_detect(m, -1.0).size() == 4);
    const auto one = detect::threshold_detect(m, 3.5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].range_bin == 1);
    CHECK(one[0].doppler_bin == 1);
}

TEST_CASE("exceedance confidence is bounded and monotone") {
    CHECK(detect::exceedance_confidence(1.0 + 1e-12, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(detect::exceedance_confidence(2.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(detect::exceedance_confidence(1e9, 1.0) == doctest::Approx(1.0));
    double prev = 0.0;
    for (double e = 1.001; e < 10.0; e += 0.11) {
        const double c = detect::exceedance_confidence(e, 1.0);
        CHECK(c > prev);
        CHECK(c < 1.0);
        prev = c;
    }
}

TEST_CASE("dbscan handles the spec corner cases") {
    SUBCASE("eight coincident points form one cluster") {
        std::vector<Detection> pts(8);
        for (auto& p : pts) {
            p.range_bin = 3.0;
            p.doppler_bin = 4.0;
            p.confidence = 0.5;
        }
        const auto out = detect::dbscan_cluster(pts, 0.5, 8);
        REQUIRE(out.size() == 1);
        CHECK(out[0].range_bin == doctest::Approx(3.0));
        CHECK(out[0].doppler_bin == doctest::Approx(4.0));
        CHECK_FALSE(out[0].noise);
    }
    SUBCASE("isolated points stay noise") {
        std::vector<Detection> pts(3);
        pts[0].range_bin = 0;
        pts[1].range_bin = 10;
        pts[2].range_bin = 20;
        const auto out = detect::dbscan_cluster(pts, 0.5, 8);
        REQUIRE(out.size() == 3);
        for (const auto& p : out) CHECK(p.noise);
    }
    SUBCASE("cluster confidence is the member max, energy the member sum") {
        std::vector<Detection> pts(4);
        for (int i = 0; i < 4; ++i) {
            pts[i].range_bin = 0.1 * i;
            pts[i].doppler_bin = 0.0;
            pts[i].confidence = 0.2 + 0.1 * i;
            pts[i].energy = 1.0;
        }
        const auto out = detect::dbscan_cluster(pts, 0.5, 2);
        REQUIRE(out.size() == 1);
        CHECK(out[0].confidence == doctest::Approx(0.5));
        CHECK(out[0].energy == doctest::Approx(4.0));
    }
}

TEST_CASE("dbscan matches the brute-force reachability oracle") {
    auto run_comparison = [](const std::vector<Detection>& pts, double eps, int min_pts) {
        const auto labels = dbscan_oracle_labels(pts, eps, min_pts);
        int n_clusters = 0;
        for (int l : labels) n_clusters = std::max(n_clusters, l + 1);
        // oracle centroids, confidence weighted
        std::vector<std::pair<double, double>> expect;
        for (int c = 0; c < n_clusters; ++c) {
            double w = 0, r = 0, d = 0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (labels[i] != c) continue;
                const double wi = std::max(pts[i].confidence, 1e-12);
                w += wi;
                r += wi * pts[i].range_bin;
                d += wi * pts[i].doppler_bin;
            }
            expect.emplace_back(r / w, d / w);
        }
        std::sort(expect.begin(), expect.end());
        const auto got = cluster_centroids(detect::dbscan_cluster(pts, eps, min_pts));
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].first == doctest::Approx(expect[i].first).epsilon(1e-9));
            CHECK(got[i].second == doctest::Approx(expect[i].second).epsilon(1e-9));
        }
        const std::size_t oracle_noise =
            static_cast<size_t>(std::count(labels.begin(), labels.end(), -1));
        std::size_t got_noise = 0;
        for (const auto& p : detect::dbscan_cluster(pts, eps, min_pts))
            if (p.noise) ++got_noise;
        CHECK(got_noise == oracle_noise);
    };

    SUBCASE("chain of points spaced 0.4 apart") {
        std::vector<Detection> pts(12);
        for (int i = 0; i < 12; ++i) {
            pts[i].range_bin = 0.4 * i;
            pts[i].doppler_bin = 1.0;
            pts[i].confidence = 0.7;
        }
        run_comparison(pts, 0.5, 3);
    }
    SUBCASE("random fields") {
        RngStream rng(33, 0, "dbscan");
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<Detection> pts(60);
            for (auto& p : pts) {
                p.range_bin = rng.uniform(0.0, 10.0);
                p.doppler_bin = rng.uniform(0.0, 10.0);
                p.confidence = rng.uniform(0.1, 1.0);
                p.energy = rng.uniform(0.1, 5.0);
            }
            run_comparison(pts, 1.2, 4);
        }
    }
}

TEST_CASE("dbscan output does not depend on input order") {
    RngStream rng(55, 0, "dbscan-order");
    std::vector<Detection> pts(40);
    for (auto& p : pts) {
        p.range_bin = rng.uniform(0.0, 6.0);
        p.doppler_bin = rng.uniform(0.0, 6.0);
        p.confidence = rng.uniform(0.1, 1.0);
        p.energy = 1.0;
    }
    const auto base = detect::dbscan_cluster(pts, 1.0, 3);
    std::vector<Detection> shuffled = pts;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
    const auto other = detect::dbscan_cluster(shuffled, 1.0, 3);
    REQUIRE(base.size() == other.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].range_bin == doctest::Approx(other[i].range_bin).epsilon(1e-12));
        CHECK(base[i].doppler_bin == doctest::Approx(other[i].doppler_bin).epsilon(1e-12));
        CHECK(base[i].noise == other[i].noise);
    }
}
