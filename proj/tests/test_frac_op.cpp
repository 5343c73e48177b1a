#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "fgs/constants.hpp"
#include "fgs/frac_op.hpp"

using namespace fgs;

namespace {

constexpr double pi = std::numbers::pi;

double sup_rel(const std::vector<double>& a, const std::vector<double>& b, const RadialGrid& g,
               double r_hi) {
    double e = 0.0, m = 0.0;
    for (int i = 0; i < g.N; ++i) {
        if (g.r[i] > r_hi) break;
        e = std::max(e, std::abs(a[i] - b[i]));
        m = std::max(m, std::abs(b[i]));
    }
    return e / m;
}

RadialField gaussian(const RadialGrid& g) {
    RadialField u;
    for (double r : g.r) u.u.push_back(std::exp(-pi * r * r));
    return u;
}

}  // namespace

TEST_CASE("order zero is the identity") {
    RadialGrid g = build_radial_grid(4, 512, 400.0);
    RadialTransformPlan plan(g);
    RadialField u = gaussian(g);
    FracOp op(plan, 0.0);
    CHECK(op.apply(u.u, 4.0) == u.u);
    // Plancherel with unit symbol
    std::vector<double> u2(g.N);
    for (int i = 0; i < g.N; ++i) u2[i] = u.u[i] * u.u[i];
    CHECK(std::abs(hs_seminorm(u, 0.0, plan) / g.integrate(u2) - 1.0) < 1e-8);
}

TEST_CASE("bubble solves the critical equation") {
    for (auto [n, s] : {std::pair{4, 0.8}, std::pair{4, 0.7}, std::pair{3, 0.6}}) {
        RadialGrid g = build_radial_grid(n, 1024, 400.0);
        RadialTransformPlan plan(g);
        RadialField Q = bubble_field(make_bubble(n, s), g);
        RadialField L = apply_fraclap_radial(Q, s, plan);
        double ps = 2.0 * n / (n - 2.0 * s);
        std::vector<double> rhs(g.N);
        for (int i = 0; i < g.N; ++i) rhs[i] = std::pow(Q.u[i], ps - 1.0);
        CHECK(sup_rel(L.u, rhs, g, g.r_max / 4) <= 1e-3);
    }
}

TEST_CASE("s = 1 on a Gaussian matches the classical Laplacian") {
    RadialGrid g = build_radial_grid(4, 1024, 400.0);
    RadialTransformPlan plan(g);
    RadialField u = gaussian(g);
    std::vector<double> want(g.N);
    for (int i = 0; i < g.N; ++i) {
        double r = g.r[i];
        want[i] = 2.0 * pi * (4.0 - 2.0 * pi * r * r) * std::exp(-pi * r * r);
    }
    CHECK(sup_rel(apply_fraclap_radial(u, 1.0, plan).u, want, g, 10.0) < 1e-4);
}

TEST_CASE("linearity") {
    RadialGrid g = build_radial_grid(4, 512, 400.0);
    RadialTransformPlan plan(g);
    FracOp op(plan, 0.75);
    std::vector<double> a = bubble_field(make_bubble(4, 0.75), g).u;
    std::vector<double> b = bubble_field(make_bubble(4, 0.75, 3.0), g).u;
    std::vector<double> c(g.N);
    for (int i = 0; i < g.N; ++i) c[i] = 2.0 * a[i] - 0.5 * b[i];
    double beta = 4.0 - 1.5;
    auto La = op.apply(a, beta), Lb = op.apply(b, beta), Lc = op.apply(c, beta);
    double e = 0.0, m = 0.0;
    for (int i = 0; i < g.N; ++i) {
        e = std::max(e, std::abs(Lc[i] - (2.0 * La[i] - 0.5 * Lb[i])));
        m = std::max(m, std::abs(Lc[i]));
    }
    // rounding in the FFT is amplified by the r^{-1} output weight near r_min
    CHECK(e / m < 1e-7);
}

TEST_CASE("scaling covariance on nested nodes") {
    // log step ln2/40, so r -> 2r is a shift by 40 nodes
    const int k = 40, N = 1024;
    double r_max = 400.0, r_min = r_max * std::pow(2.0, -double(N - 1) / k);
    RadialGrid g = build_radial_grid(4, N, r_max, Mapping::log, r_min);
    RadialTransformPlan plan(g);
    const double s = 0.8;
    FracOp op(plan, s);
    // Gaussians leave no power tail past r_max
    std::vector<double> u(N), v(N);
    for (int i = 0; i < N; ++i) {
        u[i] = std::exp(-g.r[i] * g.r[i]);
        v[i] = std::exp(-g.r[i] * g.r[i] / 4.0);
    }
    auto Lu = op.apply(u, 8.0), Lv = op.apply(v, 8.0);
    // (-Delta)^s [u(./2)](r) = 2^{-2s} [(-Delta)^s u](r/2)
    // nodes below 2 k2 are slaved to the inner r^2 fit
    double e = 0.0, m = 0.0;
    for (int i = k + 2 * plan.k2(); i < N; ++i) {
        if (g.r[i] > r_max / 8) break;
        double want = std::pow(2.0, -2.0 * s) * Lu[i - k];
        e = std::max(e, std::abs(Lv[i] - want));
        m = std::max(m, std::abs(want));
    }
    CHECK(e / m < 1e-9);
}

TEST_CASE("Hankel transform of a Gaussian") {
    RadialGrid g = build_radial_grid(4, 1024, 400.0);
    RadialTransformPlan plan(g);
    RadialField u = gaussian(g);
    std::vector<double> uh = hankel_forward(u, plan);
    // e^{-pi r^2} is its own transform
    double e = 0.0;
    for (int j = 0; j < g.N; ++j) e = std::max(e, std::abs(uh[j] - std::exp(-pi * g.rho[j] * g.rho[j])));
    CHECK(e < 1e-8);
    std::vector<double> back = hankel_inverse(uh, 8.0, plan);
    CHECK(sup_rel(back, u.u, g, g.r_max) < 1e-6);
}

TEST_CASE("bubble at the critical order") {
    const int n = 4;
    const double s0 = 2.0 / 3.0, p = 3.0;
    RadialGrid g = build_radial_grid(n, 1024, 400.0);
    RadialTransformPlan plan(g);
    BubbleSpec b = make_bubble(n, s0);
    RadialField Q = bubble_field(b, g);
    // int (1 + |y/lambda|^2)^{-n} dy = lambda^4 pi^2 Gamma(2) / Gamma(4)
    double mass = std::pow(b.lambda_s, 4) * pi * pi / 6.0;
    CHECK(std::abs(lp_norm_pow(Q, g, p) / mass - 1.0) < 1e-8);
    double S = sobolev_S_sharp(n, s0);
    CHECK(std::abs(hs_seminorm(Q, s0, plan) / std::pow(S, p / (p - 2.0)) - 1.0) < 1e-6);
    CHECK(std::abs(lp_norm(Q, g, p) - std::cbrt(mass)) < 1e-8 * std::cbrt(mass));
}

TEST_CASE("sup norm") {
    RadialGrid g = build_radial_grid(4, 256, 400.0);
    RadialField u;
    u.u.assign(g.N, 0.0);
    u.u[10] = -3.0;
    u.u[40] = 3.0;
    SupNorm m = sup_norm(u, g);
    CHECK(m.value == 3.0);
    CHECK(m.index == 10);  // ties go to the smaller radius
    CHECK(m.location == g.r[10]);
}

TEST_CASE("box operator") {
    BoxGrid box = make_box_grid(2, 4.0, 64);
    const double s = 0.7;
    BoxOperator op(box, s);
    SUBCASE("constant field") {
        std::vector<double> c(box.size(), 2.5);
        for (double x : op.apply(c)) CHECK(std::abs(x) < 1e-12);
        CHECK(std::abs(op.seminorm(c)) < 1e-12);
    }
    SUBCASE("plane wave") {
        // k = (3, 2) cycles over the period 2L
        std::vector<double> w(box.size());
        double kx = 3.0 / (2 * box.L), ky = 2.0 / (2 * box.L);
        for (int i = 0; i < box.M; ++i)
            for (int j = 0; j < box.M; ++j)
                w[i * box.M + j] = std::cos(2 * pi * (kx * box.x[i] + ky * box.x[j]));
        double lam = std::pow(2 * pi * std::hypot(kx, ky), 2 * s);
        auto Lw = op.apply(w);
        for (std::size_t q = 0; q < w.size(); ++q) CHECK(std::abs(Lw[q] - lam * w[q]) < 1e-10);
        // int cos^2 = half the box volume
        CHECK(std::abs(op.seminorm(w) / (lam * 0.5 * std::pow(2 * box.L, 2)) - 1.0) < 1e-12);
    }
}

TEST_CASE("box operator at s = 1 against the five-point stencil") {
    auto err = [](int M) {
        BoxGrid box = make_box_grid(2, 4.0, M);
        BoxOperator op(box, 1.0);
        std::vector<double> u(box.size());
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                u[i * M + j] = std::exp(-(box.x[i] * box.x[i] + box.x[j] * box.x[j]));
        auto L = op.apply(u);
        double e = 0.0, h2 = box.dx * box.dx;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) {
                auto at = [&](int a, int b) { return u[((a + M) % M) * M + (b + M) % M]; };
                double fd = (4 * at(i, j) - at(i + 1, j) - at(i - 1, j) - at(i, j + 1) - at(i, j - 1)) / h2;
                e = std::max(e, std::abs(L[i * M + j] - fd));
            }
        return e;
    };
    double e1 = err(64), e2 = err(128);
    CHECK(e1 < 5e-2);
    CHECK(e1 / e2 > 3.5);  // O(h^2)
}

TEST_CASE("singular integral oracle") {
    const int n = 4;
    const double s = 0.8;
    BubbleSpec b = make_bubble(n, s);
    auto Q = [&](double r) { return bubble_eval(b, r); };
    CHECK(std::abs(singular_integral_oracle(Q, n, s, 0.0) - 1.0) < 1e-3);
    // nearly constant field
    auto flat = [](double r) { return std::exp(-std::pow(r / 1e3, 2)); };
    CHECK(std::abs(singular_integral_oracle(flat, n, s, 0.5)) < 1e-3);
    // agreement with the spectral route
    RadialGrid g = build_radial_grid(n, 1024, 400.0);
    RadialTransformPlan plan(g);
    RadialField L = apply_fraclap_radial(bubble_field(b, g), s, plan);
    for (int i : {300, 500, 600}) {
        double o = singular_integral_oracle(Q, n, s, g.r[i]);
        CHECK(std::abs(o - L.u[i]) < 1e-3 * std::abs(L.u[i]) + 1e-6);
    }
}

TEST_CASE("kernel cache") {
    RadialGrid g = build_radial_grid(4, 256, 400.0);
    RadialTransformPlan plan(g);
    auto dir = std::filesystem::temp_directory_path() / "fgs_test_kernel_cache";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    TransformCacheKey key{4, 256, 400.0, g.r_min, Mapping::log, 0.8};
    KernelTables t = kernel_tables(plan, 0.8), back;
    std::string path = (dir / cache_file_name(key)).string();
    write_kernel_cache(path, key, t);
    REQUIRE(read_kernel_cache(path, key, back));
    CHECK(back.data == t.data);
    TransformCacheKey other = key;
    other.s = 0.7;
    CHECK_FALSE(read_kernel_cache(path, other, back));

    std::vector<double> u = bubble_field(make_bubble(4, 0.8), g).u;
    std::vector<double> plain = FracOp(plan, 0.8).apply(u, 2.4);
    set_kernel_cache_dir((dir / "auto").string());
    std::vector<double> first = FracOp(plan, 0.8).apply(u, 2.4);
    std::vector<double> second = FracOp(plan, 0.8).apply(u, 2.4);
    KernelCacheStats st = kernel_cache_stats();
    set_kernel_cache_dir("");
    CHECK(st.misses == 1);
    CHECK(st.hits == 1);
    CHECK(first == plain);
    CHECK(second == plain);
    std::filesystem::remove_all(dir);
}
