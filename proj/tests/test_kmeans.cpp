#include "cbir/errors.hpp"
#include "cbir/kmeans.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cbir;

namespace {

Matrix to_matrix(const oracle::Points& pts) {
    Matrix m;
    for (const auto& p : pts) m.append_row(p);
    return m;
}

oracle::Points to_points(const Matrix& m) {
    oracle::Points out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

oracle::Points gaussian_points(std::size_t n, std::size_t d, std::uint64_t seed, int clusters = 3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    oracle::Points pts;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> p(d);
        const double centre = 6.0 * static_cast<double>(i % static_cast<std::size_t>(clusters));
        for (double& v : p) v = centre + noise(rng);
        pts.push_back(p);
    }
    return pts;
}

} // namespace

TEST_CASE("unit_uniform maps the top 53 bits to [0,1)") {
    CHECK(unit_uniform(0) == 0.0);
    CHECK(unit_uniform(~0ull) == 1.0 - 0x1.0p-53);
    CHECK(unit_uniform(1ull << 63) == 0.5);
}

TEST_CASE("k=1 converges to the mean") {
    const auto pts = gaussian_points(50, 3, 4);
    std::vector<double> mean(3, 0.0);
    for (const auto& p : pts)
        for (std::size_t d = 0; d < 3; ++d) mean[d] += p[d] / 50.0;

    IndexParams params;
    params.k = 1;
    const auto result = kmeans(to_matrix(pts), params);
    CHECK(result.converged);
    for (std::size_t d = 0; d < 3; ++d) CHECK(std::abs(result.centroids(0, d) - mean[d]) <= 1e-12);
}

TEST_CASE("two well separated groups are recovered") {
    const oracle::Points pts = {{0, 0}, {0, 1}, {1, 0}, {10, 10}, {10, 11}, {11, 10}};
    IndexParams params;
    params.k = 2;
    params.seed = 3;
    const auto result = kmeans(to_matrix(pts), params);
    CHECK(result.assignments[0] == result.assignments[1]);
    CHECK(result.assignments[1] == result.assignments[2]);
    CHECK(result.assignments[3] == result.assignments[4]);
    CHECK(result.assignments[4] == result.assignments[5]);
    CHECK(result.assignments[0] != result.assignments[3]);
    CHECK(result.sse == doctest::Approx(4.0 * 2.0 / 3.0));
}

TEST_CASE("k-means++ picks distinct input points") {
    const auto pts = gaussian_points(40, 2, 9);
    const Matrix init = kmeanspp_init(to_matrix(pts), 5, 17);
    REQUIRE(init.rows() == 5);
    std::set<std::vector<double>> chosen;
    for (const auto& c : to_points(init)) {
        CHECK(std::find(pts.begin(), pts.end(), c) != pts.end());
        chosen.insert(c);
    }
    CHECK(chosen.size() == 5);
    CHECK(kmeanspp_init(to_matrix(pts), 5, 17) == init);
}

TEST_CASE("every Lloyd iteration matches the reference loop") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const auto pts = gaussian_points(64, 4, seed);
        const Matrix init = kmeanspp_init(to_matrix(pts), 3, seed);
        std::vector<LloydStep> steps;
        lloyd(to_matrix(pts), init, 50, 1e-9, [&](const LloydStep& s) { steps.push_back(s); });
        const auto want = oracle::lloyd(pts, to_points(init), 50, 1e-9);
        REQUIRE(steps.size() == want.size());
        for (std::size_t i = 0; i < steps.size(); ++i) {
            CHECK(steps[i].assignments == want[i].assignments);
            CHECK(steps[i].sse == doctest::Approx(want[i].sse).epsilon(1e-12));
            const auto got = to_points(steps[i].centroids);
            for (std::size_t c = 0; c < got.size(); ++c)
                for (std::size_t d = 0; d < got[c].size(); ++d)
                    CHECK(std::abs(got[c][d] - want[i].centroids[c][d]) <= 1e-9);
        }
    }
}

TEST_CASE("an emptied cluster takes the farthest point") {
    // the third centre is far from everything and loses all points
    const oracle::Points pts = {{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {9, 9}};
    const oracle::Points init = {{0, 0}, {6, 6}, {100, 100}};
    std::vector<LloydStep> steps;
    const auto result = lloyd(to_matrix(pts), to_matrix(init), 20, 1e-9, [&](const LloydStep& s) { steps.push_back(s); });
    const auto want = oracle::lloyd(pts, init, 20, 1e-9);
    REQUIRE_FALSE(steps.empty());
    CHECK(steps[0].assignments == want[0].assignments);
    CHECK(steps[0].assignments[5] == 2);
    std::vector<int> counts(3, 0);
    for (int a : result.assignments) ++counts[static_cast<std::size_t>(a)];
    for (int c : counts) CHECK(c > 0);
}

TEST_CASE("SSE never increases between iterations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pts = gaussian_points(80, 5, 100 + seed, 4);
        IndexParams params;
        params.k = 2 + static_cast<int>(seed % 5);
        params.seed = seed;
        std::vector<double> sse;
        const auto result = kmeans(to_matrix(pts), params, [&](const LloydStep& s) { sse.push_back(s.sse); });
        for (std::size_t i = 1; i < sse.size(); ++i) CHECK(sse[i] <= sse[i - 1] * (1 + 1e-12));
        CHECK(result.sse <= sse.back() * (1 + 1e-12));
    }
}

TEST_CASE("a converged solution is a fixed point") {
    const auto pts = gaussian_points(60, 3, 21);
    IndexParams params;
    params.k = 3;
    params.convergenceEps = 1e-12;
    params.maxIterations = 500;
    const auto first = kmeans(to_matrix(pts), params);
    REQUIRE(first.converged);
    const auto again = lloyd(to_matrix(pts), first.centroids, 5, 1e-12);
    CHECK(again.iterations == 1);
    CHECK(again.assignments == first.assignments);
    CHECK(again.centroids == first.centroids);
}

TEST_CASE("serial and parallel clustering agree") {
    const auto pts = gaussian_points(500, 8, 5, 6);
    IndexParams params;
    params.k = 6;
    params.seed = 2;
    const auto s = kmeans(to_matrix(pts), params, {}, Execution::Serial);
    const auto p = kmeans(to_matrix(pts), params, {}, Execution::Parallel);
    CHECK(s.centroids == p.centroids);
    CHECK(s.assignments == p.assignments);
    CHECK(s.iterations == p.iterations);
}

TEST_CASE("clustering input checks") {
    const Matrix two = to_matrix({{0.0}, {1.0}});
    IndexParams params;
    params.k = 3;
    CHECK_THROWS_AS(kmeans(two, params), InsufficientDataError);
    params.k = 0;
    CHECK_THROWS_AS(kmeans(two, params), ValidationError);
    params.k = 2;
    params.convergenceEps = 0;
    CHECK_THROWS_AS(kmeans(two, params), ValidationError);
}

TEST_CASE("assign_nearest") {
    const Matrix centroids = to_matrix({{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}});
    const std::vector<double> tie = {1.0, 0.0};
    CHECK(assign_nearest(centroids, tie) == 0);
    const std::vector<double> near_third = {0.2, 1.9};
    CHECK(assign_nearest(centroids, near_third) == 2);
    const std::vector<double> wrong = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(assign_nearest(centroids, wrong), ValidationError);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3, 3);
    const oracle::Points cs = {{0, 0}, {2, 0}, {0, 2}};
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> p = {u(rng), u(rng)};
        CHECK(assign_nearest(centroids, p) == oracle::nearest(p, cs));
    }
}
