#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fgs/constants.hpp"
#include "fgs/solver.hpp"

using namespace fgs;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a / b - 1.0); }

Potential zero_potential() {
    Potential V = constant_potential(1.0);
    V.V_inf = 0.0;
    return V;
}

struct Setup {
    RadialGrid g = build_radial_grid(4, 1024, 400.0);
    RadialTransformPlan plan{g};
};

Setup& setup() {
    static Setup s;
    return s;
}

}  // namespace

TEST_CASE("Rayleigh quotient is scale invariant") {
    auto& S = setup();
    RadialField u = bubble_field(make_bubble(4, 0.8), S.g);
    RadialField v = u;
    for (double& x : v.u) x *= 7.0;
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    CHECK(rel(eval_rayleigh(v, 0.8, V, 3.0, S.plan), eval_rayleigh(u, 0.8, V, 3.0, S.plan)) < 1e-14);
    RadialField z = u;
    for (double& x : z.u) x = 0.0;
    CHECK_THROWS(eval_rayleigh(z, 0.8, V, 3.0, S.plan));
}

TEST_CASE("bubble attains the sharp constant") {
    auto& S = setup();
    for (double s : {0.7, 0.8, 0.9}) {
        RadialField Q = bubble_field(make_bubble(4, s), S.g);
        double ps = 8.0 / (4.0 - 2.0 * s);
        CHECK(rel(eval_rayleigh(Q, s, zero_potential(), ps, S.plan), sobolev_S_sharp(4, s)) < 1e-3);
        CHECK(el_residual(Q, s, zero_potential(), ps, S.plan) < 1e-3);
    }
}

TEST_CASE("trial bubble bound near the critical order") {
    // E(Q(./eps)) = S + eps^{2 s0} int Q^2 / ||Q||_p^2 when p = 2*_{s0} and V = 1
    auto& S = setup();
    const double s0 = 2.0 / 3.0, p = 3.0, eps = 0.1;
    BubbleSpec b = make_bubble(4, s0);
    RadialField Q = bubble_field(make_bubble(4, s0, eps), S.g);
    double E = eval_rayleigh(Q, s0, constant_potential(1.0), p, S.plan);
    double lam4 = std::pow(b.lambda_s, 4);
    double q2 = lam4 * pi * pi * std::tgamma(2.0 / 3.0) / std::tgamma(8.0 / 3.0);
    double qp = lam4 * pi * pi / 6.0;
    double excess = std::pow(eps, 2 * s0) * q2 / std::pow(qp, 2.0 / p);
    double Ssharp = sobolev_S_sharp(4, s0);
    CHECK(E > Ssharp);
    CHECK(rel(E - Ssharp, excess) < 1e-3);
}

TEST_CASE("critical problem started at the bubble stays there") {
    auto& S = setup();
    const double s = 0.8, ps = 8.0 / 2.4;
    ProblemParams pr = make_params(4, ps, s);
    MinimizeConfig cfg;
    cfg.shift = 1.0;
    cfg.tol_el = 1e-5;
    std::vector<double> w0 = bubble_field(make_bubble(4, s), S.g).u;
    MinimizeResult r = minimize_rayleigh(pr, zero_potential(), S.plan, cfg, w0);
    CHECK(r.converged);
    CHECK(r.iterations <= 5);
    CHECK(rel(r.S_V, sobolev_S_sharp(4, s)) < 1e-3);
    // u = S^{1/(p-2)} Q / ||Q||_p
    GroundState gs = to_ground_state(r, pr, zero_potential(), S.plan);
    RadialField Q = bubble_field(make_bubble(4, s), S.g);
    double c = std::pow(r.S_V, 1.0 / (ps - 2.0)) / lp_norm(Q, S.g, ps);
    double e = 0.0;
    for (int i = 0; i < S.g.N; ++i) e = std::max(e, std::abs(gs.u.u[i] - c * Q.u[i]));
    CHECK(e / c < 1e-3);
}

TEST_CASE("ground state identities for V = 1") {
    auto& S = setup();
    ProblemParams pr = make_params(4, 3.0, 0.8);
    Potential V = constant_potential(1.0);
    MinimizeResult r = minimize_rayleigh(pr, V, S.plan, MinimizeConfig{});
    REQUIRE(r.converged);
    CHECK(r.residual <= 1e-6);
    for (std::size_t k = 1; k < r.trace.size(); ++k)
        CHECK(r.trace[k].energy <= r.trace[k - 1].energy * (1.0 + 1e-14));
    GroundState gs = to_ground_state(r, pr, V, S.plan);
    double target = std::pow(gs.S_V, 3.0);
    CHECK(rel(gs.lp_pow, target) < 1e-6);
    CHECK(rel(gs.kinetic + gs.potential, gs.lp_pow) < 1e-6);
    CHECK(rel(gs.lambda, gs.S_V) < 1e-6);
    CHECK(gs.residual_el < 1e-6);
    CHECK(gs.residual_pohozaev < 1e-3);
    // mu_s^{-alpha_s} = ||u||_inf
    CHECK(rel(std::pow(gs.mu_s, -pr.alpha_s), gs.sup) < 1e-14);
    for (double x : gs.u.u) CHECK(x >= 0.0);
    // constant V: dilation gives (n-2s)/2 K + n/2 V U = n/p P, with K + V U = P,
    // hence V U = (s - s0)/s P
    CHECK(rel((pr.s - pr.s0) / pr.s * gs.lp_pow, gs.potential) < 1e-3);
    // the prefactor 1/p - 1/2*_s equals (s - s0)/n, off by the factor s/n
    CHECK(rel(1.0 / 3.0 - 1.0 / pr.two_star_s(), (pr.s - pr.s0) / 4.0) < 1e-14);

    SUBCASE("perturbation raises the residual") {
        RadialField u = gs.u;
        for (int i = 0; i < S.g.N; ++i) u.u[i] += 0.1 * gs.sup * std::exp(-std::pow(std::log(S.g.r[i] / 2.0), 2));
        CHECK(el_residual(u, 0.8, V, 3.0, S.plan) > gs.residual_el);
    }

    SUBCASE("a lower potential lowers the quotient") {
        Potential W = well_potential(1.0, 0.5, 1.2, 1.0);
        MinimizeResult rw = minimize_rayleigh(pr, W, S.plan, MinimizeConfig{});
        CHECK(rw.converged);
        CHECK(rw.S_V < r.S_V);
    }
}

TEST_CASE("well ground state satisfies the Pohozaev identity") {
    auto& S = setup();
    ProblemParams pr = make_params(4, 3.0, 0.75);
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0);
    MinimizeResult r = minimize_rayleigh(pr, V, S.plan, MinimizeConfig{});
    REQUIRE(r.converged);
    GroundState gs = to_ground_state(r, pr, V, S.plan);
    CHECK(gs.residual_pohozaev < 1e-3);
    CHECK(rel(gs.lp_pow, std::pow(gs.S_V, 3.0)) < 1e-6);
}

TEST_CASE("iteration limit is reported") {
    auto& S = setup();
    ProblemParams pr = make_params(4, 3.0, 0.8);
    MinimizeConfig cfg;
    cfg.max_iter = 3;
    cfg.initial = "plain";
    MinimizeResult r = minimize_rayleigh(pr, constant_potential(1.0), S.plan, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.stop_reason == "max iterations");
}

TEST_CASE("box ground state") {
    BoxGrid box = make_box_grid(2, 8.0, 64);
    ProblemParams pr = make_params(2, 4.0, 0.8);
    Potential V = well_potential(1.5, 0.5, 1.2, 1.0, {1.0, -0.5});
    MinimizeResult r = minimize_box(pr, V, box, MinimizeConfig{}, initial_guess(pr, box));
    REQUIRE(r.converged);
    BoxGroundState gs = to_ground_state(r, pr, V, box);
    CHECK(rel(gs.lp_pow, std::pow(gs.S_V, 2.0)) < 1e-6);
    CHECK(rel(std::pow(gs.mu_s, -pr.alpha_s), gs.sup) < 1e-14);
    CHECK(rel(eval_rayleigh(gs.u, 0.8, V, 4.0, box), gs.S_V) < 1e-10);
}
