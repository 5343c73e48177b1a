#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fgs/core_model.hpp"

using namespace fgs;

TEST_CASE("derived indices") {
    ProblemParams a = make_params(4, 3.0, 0.8);
    CHECK(a.s0 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(a.alpha_s == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(a.subcritical);

    ProblemParams b = make_params(4, 3.0, 2.0 / 3.0);
    CHECK(b.two_star_s() == doctest::Approx(3.0).epsilon(1e-14));

    CHECK(make_params(2, 4.0, 0.9).s0 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_FALSE(make_params(4, 3.0, 0.6).subcritical);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make_params(4, 2.0, 0.8), ConfigError);
    CHECK_THROWS_AS(make_params(4, 3.0, 0.0), ConfigError);
    CHECK_THROWS_AS(make_params(4, 3.0, 1.2), ConfigError);
    CHECK_THROWS_AS(make_params(0, 3.0, 0.5), ConfigError);
    CHECK_THROWS_AS(parse_mapping("cubic"), ConfigError);
    CHECK(parse_mapping(mapping_name(Mapping::algebraic)) == Mapping::algebraic);
}

TEST_CASE("log grid layout") {
    RadialGrid g = build_radial_grid(4, 512, 200.0);
    REQUIRE(g.r.size() == 512);
    REQUIRE(g.w.size() == 512);
    CHECK(g.r.back() == doctest::Approx(200.0).epsilon(1e-14));
    CHECK(g.r.front() == doctest::Approx(200.0 * std::exp(-g.h * 511)).epsilon(1e-12));
    for (int i = 1; i < g.N; ++i) CHECK(g.r[i] > g.r[i - 1]);
    // frequency nodes mirror the radial ones
    CHECK(g.rho.front() * g.r.back() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.area() == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("radial quadrature") {
    // int_0^inf r^3 (1+r^2)^{-4} dr = B(2,2)/2 = 1/12, the tail past r_max added in closed form
    RadialGrid g = build_radial_grid(4, 512, 200.0);
    std::vector<double> f(g.N);
    for (int i = 0; i < g.N; ++i) f[i] = std::pow(1.0 + g.r[i] * g.r[i], -4.0);
    double tail = power_tail(4, g.r_max, std::pow(1.0 + g.r_max * g.r_max, -4.0), 8.0, 1.0);
    CHECK(std::abs((g.integrate_radial(f) + tail) * 12.0 - 1.0) <= 1e-8);

    // int_{R^4} (1+r^2)^{-4} = pi^2 Gamma(2) / Gamma(4) = pi^2 / 6
    double full = g.integrate(f) + g.area() * tail;
    CHECK(std::abs(full / (std::numbers::pi * std::numbers::pi / 6.0) - 1.0) <= 1e-8);
}

// The map exponent depends on N, so refinement is not a fixed-map refinement.
TEST_CASE("algebraic grid quadrature converges") {
    auto err = [](int N) {
        RadialGrid g = build_radial_grid(4, N, 200.0, Mapping::algebraic);
        std::vector<double> f(g.N);
        for (int i = 0; i < g.N; ++i) f[i] = std::pow(1.0 + g.r[i] * g.r[i], -4.0);
        return std::abs(g.integrate_radial(f) * 12.0 - 1.0);
    };
    double e1 = err(2048), e2 = err(4096);
    CHECK(e1 < 1e-4);
    CHECK(e1 / e2 > 2.0);
}

TEST_CASE("truncation check") {
    CHECK_THROWS_WITH_AS(build_radial_grid(4, 32, 2.0), doctest::Contains("truncation too small"),
                         ConfigError);
    CHECK_THROWS_AS(build_radial_grid(4, 32, 400.0), ConfigError);
    CHECK_NOTHROW(build_radial_grid(4, 64, 400.0));
}

TEST_CASE("power tail") {
    // int_R^inf (2 (r/R)^{-3})^2 r^{3} dr = 4 R^4 / 2
    CHECK(power_tail(4, 10.0, 2.0, 3.0, 2.0) == doctest::Approx(4.0 * 1e4 / 2.0).epsilon(1e-14));
}

TEST_CASE("box grid") {
    BoxGrid b = make_box_grid(2, 8.0, 128);
    CHECK(b.size() == 128u * 128u);
    CHECK(b.dx == doctest::Approx(16.0 / 128.0));
    CHECK(b.cell_volume() == doctest::Approx(b.dx * b.dx));
    CHECK(b.x.front() == doctest::Approx(-8.0));
    CHECK_THROWS_AS(make_box_grid(2, 8.0, 100), ConfigError);
    CHECK_THROWS_AS(make_box_grid(3, 8.0, 64), ConfigError);
}
