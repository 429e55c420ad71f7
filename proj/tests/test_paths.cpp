#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shiftlab/csv_io.hpp"
#include "shiftlab/paths.hpp"
#include "test_util.hpp"

using namespace shiftlab;

TEST_CASE("spiral endpoints for the d=2 reference path") {
    const OraclePath p = spiral_path(2, 2000, 1.0, -1.0, 4);
    CHECK(p.at(1)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.at(1)[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.at(2000)[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(p.at(2000)[1]) <= 1e-9);
}

TEST_CASE("spiral with zero radius is the origin") {
    const OraclePath p = spiral_path(4, 50, 0.0, 0.0, 3);
    for (int t = 1; t <= 50; ++t) CHECK(norm(p.at(t)) == 0.0);
}

TEST_CASE("spiral rejects odd dimensions") {
    CHECK_THROWS_AS(spiral_path(3, 100, 1.0, -1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(spiral_path(2, 1, 1.0, -1.0, 4), std::invalid_argument);
}

TEST_CASE("spiral with a=b has constant per-pair radius |a|^3") {
    Rng rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = testutil::uniform(rng, -1.5, 1.5);
        const int d = 2 * (1 + static_cast<int>(rng() % 4));
        const int k = 1 + static_cast<int>(rng() % 5);
        const OraclePath p = spiral_path(d, 40, a, a, k);
        const double want = std::abs(a * a * a);
        for (int t = 1; t <= 40; ++t) {
            for (int j = 0; j + 1 < d; j += 2) {
                const double r = std::hypot(p.at(t)[j], p.at(t)[j + 1]);
                CHECK(r == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("downsample with l=1 is the identity") {
    const OraclePath p = spiral_path(2, 64, 1.0, 0.5, 2);
    const OraclePath q = downsample_path(p, 1);
    REQUIRE(q.horizon() == p.horizon());
    for (int t = 1; t <= p.horizon(); ++t) CHECK(p.at(t) == q.at(t));
}

TEST_CASE("downsample with l=T collapses to the final point") {
    const OraclePath p = spiral_path(2, 30, 1.0, -1.0, 1);
    const OraclePath q = downsample_path(p, 30);
    for (int t = 1; t <= 30; ++t) CHECK(q.at(t) == p.at(30));
}

TEST_CASE("downsample ceiling arithmetic and tail clamp") {
    OraclePath p;
    for (int t = 1; t <= 10; ++t) p.points.push_back(Vec{static_cast<double>(t)});
    const OraclePath q = downsample_path(p, 4);
    for (int t = 1; t <= 4; ++t) CHECK(q.at(t)[0] == 4.0);
    for (int t = 5; t <= 8; ++t) CHECK(q.at(t)[0] == 8.0);
    // ceil(t/4)*4 = 12 > T clamps to 10
    for (int t = 9; t <= 10; ++t) CHECK(q.at(t)[0] == 10.0);
}

TEST_CASE("bursty gamma spikes at episode starts") {
    const ShiftTrace g = bursty_gamma(40, 1.0, 120);
    REQUIRE(g.length() == 120);
    for (int t = 1; t <= 120; ++t) {
        const bool spike = (t == 1 || t == 41 || t == 81);
        CHECK(g.at(t) == (spike ? 1.0 : 0.0));
    }
}

TEST_CASE("bursty gamma degenerate settings") {
    const ShiftTrace zero = bursty_gamma(40, 0.0, 100);
    for (int t = 1; t <= 100; ++t) CHECK(zero.at(t) == 0.0);
    const ShiftTrace dense = bursty_gamma(1, 0.7, 25);
    for (int t = 1; t <= 25; ++t) CHECK(dense.at(t) == 0.7);
}

TEST_CASE("smooth gamma follows the power law") {
    const ShiftTrace g = smooth_gamma(1.0, 10);
    CHECK(g.at(1) == doctest::Approx(1.0));
    CHECK(g.at(2) == doctest::Approx(0.5));
    CHECK(g.at(4) == doctest::Approx(0.25));
    const ShiftTrace h = smooth_gamma(0.5, 10);
    CHECK(h.at(4) == doctest::Approx(0.5));
    const ShiftTrace steep = smooth_gamma(50.0, 6);
    CHECK(steep.at(1) == doctest::Approx(1.0));
    for (int t = 2; t <= 6; ++t) CHECK(steep.at(t) <= 1e-15);
}

TEST_CASE("realize_path with zero shifts is constant") {
    Rng rng(3);
    ShiftTrace g;
    g.gammas.assign(20, 0.0);
    const OraclePath p = realize_path(g, 3, Vec{1.0, 2.0, 3.0}, rng);
    REQUIRE(p.horizon() == 21);
    for (int t = 1; t <= 21; ++t) CHECK(p.at(t) == Vec{1.0, 2.0, 3.0});
}

TEST_CASE("gamma_of_path inverts realize_path") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 5);
        ShiftTrace g;
        for (int i = 0; i < 30; ++i) g.gammas.push_back(testutil::uniform(rng, 0.0, 2.0));
        const OraclePath p = realize_path(g, d, zeros(d), rng);
        const ShiftTrace back = gamma_of_path(p);
        REQUIRE(back.length() == g.length());
        for (int t = 1; t <= g.length(); ++t) {
            CHECK(back.at(t) == doctest::Approx(g.at(t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("realize_path in one dimension moves by exactly the shift") {
    Rng rng(41);
    ShiftTrace g;
    g.gammas = {1.0, 1.0};
    const OraclePath p = realize_path(g, 1, Vec{0.0}, rng);
    CHECK(std::abs(std::abs(p.at(2)[0] - p.at(1)[0]) - 1.0) <= 1e-12);
    CHECK(std::abs(std::abs(p.at(3)[0] - p.at(2)[0]) - 1.0) <= 1e-12);
}

TEST_CASE("gamma_of_path basics") {
    OraclePath constant;
    constant.points.assign(5, Vec{1.0, 1.0});
    for (double g : gamma_of_path(constant).gammas) CHECK(g == 0.0);

    OraclePath two;
    two.points = {Vec{0.0, 0.0}, Vec{3.0, 4.0}};
    CHECK(gamma_of_path(two).at(1) == doctest::Approx(5.0));

    OraclePath single;
    single.points = {Vec{1.0}};
    CHECK(gamma_of_path(single).length() == 0);
}

TEST_CASE("constant-radius spiral has constant shift magnitude") {
    const int T = 101;
    const int k = 1;
    const OraclePath p = spiral_path(2, T, 1.0, 1.0, k);
    const ShiftTrace g = gamma_of_path(p);
    // Uniform angular grid: every chord subtends the same angle.
    const double chord = 2.0 * std::sin(k * std::numbers::pi / (T - 1));
    for (int t = 1; t <= g.length(); ++t) {
        CHECK(g.at(t) == doctest::Approx(chord).epsilon(1e-9));
    }
}

TEST_CASE("path CSV export has the versioned header and one row per step") {
    const OraclePath p = spiral_path(2, 12, 1.0, -1.0, 1);
    const std::string file = "paths_export_test.csv";
    write_path_csv(file, p);
    std::ifstream in(file);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# shiftlab-path-v1");
    std::getline(in, line);
    CHECK(line == "t,coord_1,coord_2");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 12);
}
