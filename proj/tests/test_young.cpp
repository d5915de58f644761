#include <catch_amalgamated.hpp>

#include <cmath>

#include "girsanov/rng.hpp"
#include "girsanov/young.hpp"

using namespace girsanov;

TEST_CASE("theta at reference points") {
    CHECK(theta(0.0) == 0.0);
    CHECK(theta(1.0) == Catch::Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
    CHECK(theta(std::log(2.0)) == Catch::Approx(1.0 - std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("theta series guard agrees with direct branch at the threshold") {
    for (double a : {1e-4, -1e-4, 9.9e-5, -9.9e-5, 1.000001e-4}) {
        double direct = std::expm1(a) - a;
        CHECK(std::abs(theta(a) - direct) < 1e-14);
    }
    // deep cancellation zone: the series is the only trustworthy branch
    CHECK(theta(1e-9) == Catch::Approx(0.5e-18).epsilon(1e-10));
    CHECK(theta(0.0) == 0.0);
}

TEST_CASE("theta is nonnegative and convex") {
    RandomStream rs(7, 0, StreamPurpose::generic);
    for (int i = 0; i < 1000; ++i) {
        double x = -6.0 + 12.0 * rs.u01();
        double y = -6.0 + 12.0 * rs.u01();
        CHECK(theta(x) >= 0.0);
        double mid = theta(0.5 * (x + y));
        CHECK(mid <= 0.5 * (theta(x) + theta(y)) + 1e-12 * (1.0 + mid));
    }
}

TEST_CASE("theta_star at reference points") {
    CHECK(theta_star(-1.0) == 1.0);
    CHECK(theta_star(0.0) == 0.0);
    CHECK(theta_star(1.0) == Catch::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
    CHECK(theta_star(-1.5) == kInf);
    CHECK(theta_star(-100.0) == kInf);
}

TEST_CASE("theta_star matches the conjugate supremum on an a-grid") {
    // sup_a { a b - theta(a) } scanned over a fine grid; the optimizer is
    // a* = log(1+b), well inside [-8, 3] for b in [-0.999, 5]
    for (double b : {-0.999, -0.9, -0.5, -0.1, 0.0, 0.3, 1.0, 2.5, 5.0}) {
        double best = -kInf;
        for (double a = -8.0; a <= 3.0; a += 5e-5) {
            double v = a * b - theta(a);
            if (v > best) best = v;
        }
        CHECK(std::abs(theta_star(b) - best) < 1e-8);
    }
}

TEST_CASE("theta_star series guard agrees with direct branch") {
    for (double b : {1e-4, -1e-4, 9.9e-5, -9.9e-5}) {
        double direct = (b + 1.0) * std::log1p(b) - b;
        CHECK(std::abs(theta_star(b) - direct) < 1e-14);
    }
}

TEST_CASE("theta_star(l-1) equals the entropy integrand l log l - l + 1") {
    // log-spaced grid over (0, 10] plus the l -> 0 convention
    for (double e = -6.0; e <= 1.0; e += 0.01) {
        double l = std::pow(10.0, e);
        double direct = l * std::log(l) - l + 1.0;
        CHECK(std::abs(theta_star(l - 1.0) - direct) < 1e-12);
        CHECK(std::abs(poisson_kl_integrand(l) - direct) < 1e-12);
    }
    CHECK(poisson_kl_integrand(0.0) == 1.0);
    CHECK(theta_star(-1.0) == 1.0);
}

TEST_CASE("fenchel gap at reference points") {
    CHECK(fenchel_gap(1.0, 0.0) == 0.0);
    CHECK(fenchel_gap(0.0, -kInf) == 0.0);
    CHECK(fenchel_gap(2.0, 0.0) ==
          Catch::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("fenchel gap is nonnegative with equality exactly at a = e^b") {
    RandomStream rs(11, 0, StreamPurpose::generic);
    for (int i = 0; i < 2000; ++i) {
        double a = 5.0 * rs.u01();
        double b = -4.0 + 8.0 * rs.u01();
        double gap = fenchel_gap(a, b);
        CHECK(gap >= -1e-15);
        if (std::abs(a - std::exp(b)) >= 1e-6) CHECK(gap > 0.0);
        CHECK(std::abs(fenchel_gap(std::exp(b), b)) < 1e-12);
    }
    // the convention row: a = 0 pairs with b = -inf
    CHECK(fenchel_gap(0.0, -5.0) == Catch::Approx(std::exp(-5.0)).epsilon(1e-12));
}
