#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdtrack/eval_metrics.hpp"
#include "rdtrack/hungarian.hpp"
#include "rdtrack/rng.hpp"

using namespace rdtrack;

namespace {

double assignment_total(const CostMatrix& m, const std::vector<int>& match) {
    double total = 0.0;
    for (int r = 0; r < m.rows; ++r)
        if (match[r] >= 0) total += m.at(r, match[r]);
    return total;
}

// exhaustive minimum over injective maps of the smaller side into the larger
double brute_force_min(const CostMatrix& m) {
    const bool wide = m.rows <= m.cols;
    const int small = wide ? m.rows : m.cols;
    const int large = wide ? m.cols : m.rows;
    std::vector<int> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < small; ++i)
            total += wide ? m.at(i, perm[i]) : m.at(perm[i], i);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// brute-force OSPA over injective assignments of the smaller set
double ospa_oracle(std::vector<std::vector<double>> x, std::vector<std::vector<double>> y,
                   double c, double p) {
    if (x.size() > y.size()) std::swap(x, y);
    const std::size_t m = x.size(), n = y.size();
    if (n == 0) return 0.0;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < x[i].size(); ++k) {
                const double d = x[i][k] - y[idx[i]][k];
                d2 += d * d;
            }
            total += std::pow(std::min(std::sqrt(d2), c), p);
        }
        best = std::min(best, total);
    } while (std::next_permutation(idx.begin(), idx.end()));
    best += std::pow(c, p) * static_cast<double>(n - m);
    return std::pow(best / static_cast<double>(n), 1.0 / p);
}

}  // namespace

TEST_CASE("assignment on hand cases") {
    CostMatrix diag(3, 3, 5.0);
    diag.at(0, 0) = diag.at(1, 1) = diag.at(2, 2) = 0.0;
    const auto m1 = solve_assignment(diag);
    CHECK(m1 == std::vector<int>{0, 1, 2});

    CostMatrix two(2, 2);
    two.at(0, 0) = 1;
    two.at(0, 1) = 2;
    two.at(1, 0) = 2;
    two.at(1, 1) = 1;
    const auto m2 = solve_assignment(two);
    CHECK(m2 == std::vector<int>{0, 1});
    CHECK(assignment_total(two, m2) == 2.0);
}

TEST_CASE("assignment equals brute force on random rectangular matrices") {
    RngStream rng(17, 0, "hungarian");
    for (int trial = 0; trial < 300; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_u64() % 5);
        const int cols = 1 + static_cast<int>(rng.next_u64() % 6);
        CostMatrix m(rows, cols);
        for (auto& c : m.cost) c = rng.uniform(0.0, 10.0);
        const auto match = solve_assignment(m);
        // every row assigned when enough columns, no column reuse
        std::vector<int> used(cols, 0);
        int assigned = 0;
        for (int r = 0; r < rows; ++r) {
            if (match[r] >= 0) {
                ++assigned;
                CHECK(used[match[r]] == 0);
                used[match[r]] = 1;
            }
        }
        CHECK(assigned == std::min(rows, cols));
        CHECK(assignment_total(m, match) == doctest::Approx(brute_force_min(m)).epsilon(1e-12));
    }
}

TEST_CASE("ospa matches the spec cases") {
    const eval::OspaParams params{5.0, 1.0};
    const std::vector<std::vector<double>> empty;
    CHECK(eval::ospa(empty, empty, params) == 0.0);

    const std::vector<std::vector<double>> x = {{0.0}};
    CHECK(eval::ospa(x, x, params) == 0.0);

    const std::vector<std::vector<double>> one = {{3.0}};
    CHECK(eval::ospa(empty, one, params) == 5.0);
    CHECK(eval::ospa(one, empty, params) == 5.0);

    // brute force over assignments: (min(1,5) + 5) / 2 = 3
    const std::vector<std::vector<double>> a = {{0.0}};
    const std::vector<std::vector<double>> b = {{1.0}, {10.0}};
    CHECK(eval::ospa(a, b, params) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ospa matches brute force and its metric properties hold") {
    RngStream rng(23, 0, "ospa");
    const eval::OspaParams params{5.0, 1.0};
    for (int trial = 0; trial < 200; ++trial) {
        auto make_set = [&](std::size_t n) {
            std::vector<std::vector<double>> s;
            for (std::size_t i = 0; i < n; ++i)
                s.push_back({rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)});
            return s;
        };
        const auto x = make_set(rng.next_u64() % 6);
        const auto y = make_set(rng.next_u64() % 6);
        const auto z = make_set(rng.next_u64() % 6);
        const double dxy = eval::ospa(x, y, params);
        CHECK(dxy == doctest::Approx(ospa_oracle(x, y, 5.0, 1.0)).epsilon(1e-9));
        CHECK(dxy == doctest::Approx(eval::ospa(y, x, params)).epsilon(1e-12));
        CHECK(dxy <= 5.0 + 1e-12);
        CHECK(eval::ospa(x, x, params) == doctest::Approx(0.0));
        // triangle inequality for p = 1
        const double dxz = eval::ospa(x, z, params);
        const double dzy = eval::ospa(z, y, params);
        CHECK(dxy <= dxz + dzy + 1e-9);
    }
}

TEST_CASE("pd_pfa greedy matching follows the tolerance box") {
    GroundTruthFrame truth;
    truth.entries = {{10.0, 10.0}, {20.0, 20.0}};

    SUBCASE("perfect detections") {
        std::vector<Detection> dets(2);
        dets[0].range_bin = 10.0;
        dets[0].doppler_bin = 10.0;
        dets[1].range_bin = 20.0;
        dets[1].doppler_bin = 20.0;
        const auto r = eval::pd_pfa(dets, truth, 1.0, 1.0, 1000);
        CHECK(r.pd == 1.0);
        CHECK(r.pfa == 0.0);
        CHECK(r.matches.size() == 2);
    }
    SUBCASE("empty detections") {
        const auto r = eval::pd_pfa({}, truth, 1.0, 1.0, 1000);
        CHECK(r.pd == 0.0);
        CHECK(r.pfa == 0.0);
    }
    SUBCASE("detection outside tolerance is a false alarm") {
        std::vector<Detection> dets(1);
        dets[0].range_bin = 12.0;
        dets[0].doppler_bin = 10.0;
        const auto r = eval::pd_pfa(dets, truth, 1.0, 1.0, 1000);
        CHECK(r.pd == 0.0);
        CHECK(r.pfa == doctest::Approx(1.0 / 1000.0));
    }
    SUBCASE("one-to-one: a single detection cannot match two truths") {
        GroundTruthFrame close;
        close.entries = {{10.0, 10.0}, {10.5, 10.0}};
        std::vector<Detection> dets(1);
        dets[0].range_bin = 10.2;
        dets[0].doppler_bin = 10.0;
        const auto r = eval::pd_pfa(dets, close, 1.0, 1.0, 1000);
        CHECK(r.matches.size() == 1);
        CHECK(r.pd == doctest::Approx(0.5));
        CHECK(r.matches[0].second == 0);  // nearest truth wins
    }
    SUBCASE("pd is monotone nonincreasing as the tolerance shrinks") {
        RngStream rng(41, 0, "pdtol");
        std::vector<Detection> dets(6);
        for (auto& d : dets) {
            d.range_bin = rng.uniform(5.0, 25.0);
            d.doppler_bin = rng.uniform(5.0, 25.0);
        }
        double prev = 1.0;
        for (double tol = 8.0; tol >= 0.25; tol *= 0.5) {
            const double pd = eval::pd_pfa(dets, truth, tol, tol, 1000).pd;
            CHECK(pd <= prev + 1e-12);
            prev = pd;
        }
    }
}

TEST_CASE("summarize basic aggregates") {
    const auto one = eval::summarize({4.25});
    CHECK(one.mean == 4.25);
    CHECK(one.median == 4.25);

    const auto s = eval::summarize({1.0, 2.0, 3.0});
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.median == 2.0);

    const auto p = eval::summarize({3.0, 1.0, 2.0});
    CHECK(p.mean == doctest::Approx(s.mean));
    CHECK(p.median == s.median);

    CHECK_THROWS_AS(eval::summarize({}), DataError);
}
