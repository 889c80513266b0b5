#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qsdlab/geometry.hpp"

using namespace qsdlab;

TEST_CASE("disk exit times") {
    Domain disk = Disk{Point(0, 0), 1.0};
    for (double ang = 0.0; ang < 6.2; ang += 0.37)
        CHECK(exit_time(disk, Point(0, 0), Point(std::cos(ang), std::sin(ang))) == doctest::Approx(1.0));
    CHECK(exit_time(disk, Point(0.5, 0), Point(1, 0)) == doctest::Approx(0.5));
    CHECK(exit_time(disk, Point(0.5, 0), Point(-1, 0)) == doctest::Approx(1.5));
    CHECK_THROWS_AS(exit_time(disk, Point(2, 0), Point(1, 0)), std::invalid_argument);
    CHECK_THROWS_AS(exit_time(disk, Point(0, 0), Point(2, 0)), std::invalid_argument);
}

TEST_CASE("square exit along the diagonal") {
    ConvexPolygon square{{Point(-1, -1), Point(1, -1), Point(1, 1), Point(-1, 1)}};
    Domain dom = square;
    validate_domain(dom);
    double c45 = std::sqrt(0.5);
    CHECK(exit_time(dom, Point(0, 0), Point(c45, c45)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(exit_time(dom, Point(0, 0), Point(1, 0)) == doctest::Approx(1.0));
    CHECK(domain_diameter(dom) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(distance_to_boundary(dom, Point(0.25, 0)) == doctest::Approx(0.75));
}

TEST_CASE("domain validation") {
    CHECK_THROWS_AS(validate_domain(Domain(Disk{Point(0, 0), -1.0})), std::invalid_argument);
    // clockwise square is rejected
    ConvexPolygon cw{{Point(-1, -1), Point(-1, 1), Point(1, 1), Point(1, -1)}};
    CHECK_THROWS_AS(validate_domain(Domain(cw)), std::invalid_argument);
    // collinear vertices are not strictly convex
    ConvexPolygon degenerate{{Point(0, 0), Point(1, 0), Point(2, 0)}};
    CHECK_THROWS_AS(validate_domain(Domain(degenerate)), std::invalid_argument);
}

TEST_CASE("containment and boundary distance on the disk") {
    Domain disk = Disk{Point(1, 1), 2.0};
    CHECK(domain_contains(disk, Point(1, 1)));
    CHECK(domain_contains(disk, Point(2.5, 1)));
    CHECK_FALSE(domain_contains(disk, Point(3.5, 1)));
    CHECK(distance_to_boundary(disk, Point(1, 1)) == doctest::Approx(2.0));
    CHECK(distance_to_boundary(disk, Point(2, 1)) == doctest::Approx(1.0));
    CHECK(domain_diameter(disk) == doctest::Approx(4.0));
}

TEST_CASE("exit point lies on the boundary") {
    Domain disk = Disk{Point(0.3, -0.2), 1.7};
    ConvexPolygon tri{{Point(0, 0), Point(3, 0), Point(1, 2)}};
    Domain dom2 = tri;
    uint64_t s = 5;
    auto next = [&]() {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    };
    for (int trial = 0; trial < 200; ++trial) {
        double ang = next() * 6.283185307179586;
        Point u(std::cos(ang), std::sin(ang));
        Point x1(0.3 + (next() - 0.5), -0.2 + (next() - 0.5));
        if (domain_contains(disk, x1)) {
            double t = exit_time(disk, x1, u);
            CHECK(std::abs((x1 + t * u - Point(0.3, -0.2)).norm() - 1.7) < 1e-12);
        }
        Point x2(1.0 + (next() - 0.5), 0.5 * next() + 0.2);
        if (domain_contains(dom2, x2)) {
            double t = exit_time(dom2, x2, u);
            Point hit = x2 + t * u;
            CHECK_FALSE(domain_contains(dom2, hit + 1e-12 * u));
            CHECK(domain_contains(dom2, hit - 1e-9 * u));
        }
    }
}
