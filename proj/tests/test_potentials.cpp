#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fgs/potentials.hpp"

using namespace fgs;

namespace {
AssumptionCheck find(const AssumptionReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing check " << name);
    return {};
}
}  // namespace

TEST_CASE("constant potential") {
    Potential V = constant_potential(1.0);
    std::vector<double> x{0.3, -2.0, 1.0, 4.0};
    CHECK(eval_V(V, x) == 1.0);
    for (double g : eval_gradV(V, x)) CHECK(g == 0.0);
    CHECK(eval_x_dot_gradV(V, x) == 0.0);
    CHECK_THROWS_AS(constant_potential(0.0), ConfigError);
}

TEST_CASE("well at its center") {
    Potential V = well_potential(1.5, 0.5, 2.0, 0.8, {0.3, -0.2, 0.1, 0.4});
    std::vector<double> x0 = V.x0;
    for (double g : eval_gradV(V, x0)) CHECK(std::abs(g) < 1e-15);
    CHECK(eval_V(V, x0) == doctest::Approx(V.V0()).epsilon(1e-15));
    // Hessian trace by central differences equals 2 n A
    double h = 1e-4, tr = 0.0;
    for (int i = 0; i < 4; ++i) {
        auto xp = x0, xm = x0;
        xp[i] += h;
        xm[i] -= h;
        tr += (eval_V(V, xp) - 2.0 * eval_V(V, x0) + eval_V(V, xm)) / (h * h);
    }
    CHECK(tr == doctest::Approx(2.0 * 4 * V.A()).epsilon(1e-6));
}

TEST_CASE("well gradient against finite differences") {
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    std::vector<double> x{0.7, -0.4, 1.1, 0.2};
    auto g = eval_gradV(V, x);
    double h = 1e-6, xg = 0.0;
    for (int i = 0; i < 4; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        CHECK(g[i] == doctest::Approx((eval_V(V, xp) - eval_V(V, xm)) / (2 * h)).epsilon(1e-7));
        xg += x[i] * g[i];
    }
    CHECK(eval_x_dot_gradV(V, x) == doctest::Approx(xg).epsilon(1e-14));
    double r = std::sqrt(0.49 + 0.16 + 1.21 + 0.04);
    CHECK(eval_V_radial(V, r) == doctest::Approx(eval_V(V, x)).epsilon(1e-15));
    CHECK(eval_x_dot_gradV_radial(V, r) == doctest::Approx(xg).epsilon(1e-13));
}

TEST_CASE("well far field") {
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    double r = 1e6;
    CHECK(std::abs(eval_V_radial(V, r) - 1.5) < 1e-6);
    // x.gradV ~ B m (r/w)^{-m}
    CHECK(eval_x_dot_gradV_radial(V, r) * std::pow(r, 1.2) == doctest::Approx(0.5 * 1.2).epsilon(1e-6));
}

TEST_CASE("x.gradV bound") {
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    double best = 0.0;
    for (double t = -8; t < 8; t += 1e-3) best = std::max(best, std::abs(eval_x_dot_gradV_radial(V, std::exp(t))));
    CHECK(best <= 0.5 * 1.2 / 4.0 + 1e-15);
    CHECK(best == doctest::Approx(0.5 * 1.2 / 4.0).epsilon(1e-6));
}

TEST_CASE("assumptions") {
    ProblemParams pr = make_params(4, 3.0, 0.7);
    AssumptionReport ok = validate_assumptions(well_potential(1.5, 0.5, 1.2, 1.0), pr);
    CHECK(ok.all_pass());
    CHECK(find(ok, "V3").pass);

    AssumptionReport steep = validate_assumptions(well_potential(1.5, 0.5, 1.5, 1.0), pr);
    CHECK_FALSE(steep.all_pass());
    CHECK_FALSE(find(steep, "V3").pass);

    AssumptionReport flat = validate_assumptions(well_potential(1.0, 1.0, 1.2, 1.0), pr);
    CHECK_FALSE(find(flat, "V1").pass);

    CHECK(validate_assumptions(constant_potential(1.0), pr).all_pass());
}

TEST_CASE("sampling") {
    RadialGrid g = build_radial_grid(4, 256, 400.0);
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    auto v = sample_V(V, g);
    for (int i = 0; i < g.N; i += 17) CHECK(v[i] == eval_V_radial(V, g.r[i]));
    CHECK_THROWS_AS(sample_V(well_potential(1.5, 0.5, 1.2, 1.0, {1.0, 0, 0, 0}), g), ConfigError);

    // periodic images: distance is taken to the nearest copy of x0
    BoxGrid box = make_box_grid(2, 4.0, 64);
    Potential W = well_potential(1.5, 0.5, 1.2, 1.0, {3.5, 0.0});
    auto vb = sample_V(W, box);
    auto at = [&](double x, double y) {
        int i = int(std::lround((x + box.L) / box.dx)) % box.M;
        int j = int(std::lround((y + box.L) / box.dx)) % box.M;
        return vb[i * box.M + j];
    };
    // (-4, 0) sits 0.5 from the image at (-4.5, 0), (3, 0) sits 0.5 from x0
    CHECK(at(-4.0, 0.0) == doctest::Approx(at(3.0, 0.0)).epsilon(1e-14));
    CHECK(at(3.5, 0.0) == doctest::Approx(W.V0()).epsilon(1e-14));
}
