#include "fgs/solver.hpp"

#include <algorithm>
#include <cmath>

#include "fgs/constants.hpp"

namespace fgs {

namespace {

double shift_of(const MinimizeConfig& cfg, const Potential& V) {
    return cfg.shift > 0.0 ? cfg.shift : V.V0();
}

struct RadialDisc {
    const RadialTransformPlan& plan;
    const RadialGrid& g;
    FracOp op;
    std::vector<double> V;
    double p;

    RadialDisc(const RadialTransformPlan& pl, double s, double shift, const Potential& pot, double pp)
        : plan(pl), g(pl.grid()), op(pl, s, shift), V(sample_V(pot, pl.grid())), p(pp) {}

    double lp_pow(const std::vector<double>& w) const {
        double acc = 0.0;
        for (int i = 0; i < g.N; ++i) acc += g.w[i] * std::pow(std::abs(w[i]), p);
        return g.area() * acc;
    }
    std::vector<double> normalize(const std::vector<double>& w) const {
        std::vector<double> v = plan.smooth(w);
        double c = std::pow(lp_pow(v), -1.0 / p);
        for (double& x : v) x *= c;
        return v;
    }
    double energy(const std::vector<double>& w, std::vector<double>& Lw) const {
        double beta = op.tail_hint(w);
        Lw = op.apply(w, beta);
        double pot = 0.0;
        for (int i = 0; i < g.N; ++i) pot += g.w[i] * V[i] * w[i] * w[i];
        return (op.seminorm(w, beta) + g.area() * pot) / std::pow(lp_pow(w), 2.0 / p);
    }
    std::vector<double> precondition(const std::vector<double>& r) const {
        return op.precondition(r);
    }
    double residual(const std::vector<double>& r, const std::vector<double>& w) const {
        double a = 0.0, b = 0.0;
        for (int i = 0; i < g.N; ++i) {
            a += g.w[i] * r[i] * r[i];
            b += g.w[i] * w[i] * w[i];
        }
        return std::sqrt(a / b);
    }
    double half_radius(const std::vector<double>& w) const {
        for (int i = 0; i < g.N; ++i)
            if (w[i] < 0.5 * w[0]) return g.r[i];
        return g.r_max;
    }
    double r_min() const { return g.r_min; }
};

struct BoxDisc {
    const BoxGrid& box;
    BoxOperator op;
    std::vector<double> V;
    double p, shift;

    BoxDisc(const BoxGrid& b, double s, double sh, const Potential& pot, double pp)
        : box(b), op(b, s), V(sample_V(pot, b)), p(pp), shift(sh) {}

    double lp_pow(const std::vector<double>& w) const {
        double acc = 0.0;
        for (double x : w) acc += std::pow(std::abs(x), p);
        return box.cell_volume() * acc;
    }
    std::vector<double> normalize(const std::vector<double>& w) const {
        std::vector<double> v(w);
        double c = std::pow(lp_pow(v), -1.0 / p);
        for (double& x : v) x *= c;
        return v;
    }
    double energy(const std::vector<double>& w, std::vector<double>& Lw) const {
        Lw = op.apply(w);
        double pot = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) pot += V[k] * w[k] * w[k];
        return (op.seminorm(w) + box.cell_volume() * pot) / std::pow(lp_pow(w), 2.0 / p);
    }
    std::vector<double> precondition(const std::vector<double>& r) const {
        return op.precondition(r, shift);
    }
    double residual(const std::vector<double>& r, const std::vector<double>& w) const {
        double a = 0.0, b = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            a += r[k] * r[k];
            b += w[k] * w[k];
        }
        return std::sqrt(a / b);
    }
    double half_radius(const std::vector<double>&) const { return box.L; }
    double r_min() const { return 0.0; }
};

template <class Disc>
MinimizeResult gradient_flow(const Disc& D, const std::vector<double>& V,
                             const MinimizeConfig& cfg, const std::vector<double>& w0) {
    MinimizeResult res;
    std::vector<double> w = w0;
    for (double& x : w) x = std::abs(x);
    w = D.normalize(w);
    std::vector<double> Lw, Lwn;
    double E = D.energy(w, Lw);
    if (!std::isfinite(E)) throw ConvergenceError("initial energy is not finite");
    double t = cfg.step0;
    std::vector<double> hist;
    const std::size_t n = w.size();
    std::vector<double> r(n), wn(n);
    for (int it = 0;; ++it) {
        double lam = E;
        for (std::size_t i = 0; i < n; ++i)
            r[i] = Lw[i] + V[i] * w[i] - lam * std::pow(std::abs(w[i]), D.p - 1.0);
        double rel = D.residual(r, w);
        double sup = 0.0;
        for (double x : w) sup = std::max(sup, std::abs(x));
        double half = D.half_radius(w);
        res.trace.push_back({it, E, rel, t, sup, half});
        res.iterations = it;
        res.residual = rel;
        hist.push_back(E);
        if (rel <= cfg.tol_el) {
            res.converged = true;
            res.stop_reason = "residual";
            break;
        }
        if (int(hist.size()) > cfg.stall_window &&
            hist[hist.size() - 1 - cfg.stall_window] - E < cfg.tol_stall * std::abs(E)) {
            // no further progress, residual still above tolerance
            res.stop_reason = "energy stall";
            break;
        }
        if (D.r_min() > 0.0 && half < cfg.collapse_factor * D.r_min()) {
            res.collapsed = true;
            res.stop_reason = "collapse";
            if (cfg.stop_on_collapse) break;
        }
        if (it >= cfg.max_iter) {
            res.stop_reason = "max iterations";
            break;
        }
        std::vector<double> d = D.precondition(r);
        t = std::min(cfg.step0, 2.0 * t);
        double En = E;
        bool accepted = false;
        while (t >= cfg.step_min) {
            for (std::size_t i = 0; i < n; ++i) {
                wn[i] = w[i] - t * d[i];
                if (cfg.modulus_each_step) wn[i] = std::abs(wn[i]);
            }
            wn = D.normalize(wn);
            En = D.energy(wn, Lwn);
            if (std::isfinite(En) && En <= E + cfg.energy_slack * std::abs(E)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            res.stop_reason = "line search";
            break;
        }
        w.swap(wn);
        Lw.swap(Lwn);
        E = En;
    }
    for (double& x : w) x = std::abs(x);
    res.w = D.normalize(w);
    res.S_V = D.energy(res.w, Lw);
    return res;
}

}  // namespace

double eval_rayleigh(const RadialField& u, double s, const Potential& V, double p,
                     const RadialTransformPlan& plan) {
    const RadialGrid& g = plan.grid();
    FracOp op(plan, s);
    double beta = u.tail ? *u.tail : op.tail_hint(u.u);
    double lp = lp_norm_pow(u, g, p);
    if (!(lp > 0.0)) throw ConfigError("Rayleigh quotient of the zero field");
    std::vector<double> v = sample_V(V, g);
    double pot = 0.0;
    for (int i = 0; i < g.N; ++i) pot += g.w[i] * v[i] * u.u[i] * u.u[i];
    if (u.tail && V.V_inf != 0.0) pot += V.V_inf * power_tail(g.n, g.r_max, u.u[g.N - 1], *u.tail, 2.0);
    return (op.seminorm(u.u, beta) + g.area() * pot) / std::pow(lp, 2.0 / p);
}

double eval_rayleigh(const BoxField& u, double s, const Potential& V, double p, const BoxGrid& box) {
    BoxDisc D(box, s, 1.0, V, p);
    double lp = D.lp_pow(u.u);
    if (!(lp > 0.0)) throw ConfigError("Rayleigh quotient of the zero field");
    std::vector<double> Lw;
    return D.energy(u.u, Lw);
}

std::vector<double> initial_guess(const ProblemParams& params, const Potential& V,
                                  const RadialGrid& g, const std::string& kind) {
    double scale = 1.0;
    double gap = params.s - params.s0;
    if (kind == "bubble" && gap > 0.0 && gap < 0.1 && 4.0 * params.s0 < params.n) {
        double A = blowup_A(params.n, params.s0);
        scale = std::pow(gap / (params.s0 / params.n * A * V.V0()), 1.0 / (2.0 * params.s));
    } else if (kind != "bubble" && kind != "plain") {
        throw ConfigError("unknown initial guess '" + kind + "'");
    }
    return bubble_field(make_bubble(params.n, params.s, scale), g).u;
}

std::vector<double> initial_guess(const ProblemParams&, const BoxGrid& box) {
    std::vector<double> w(box.size());
    const int M = box.M;
    for (std::size_t k = 0; k < w.size(); ++k) {
        double r2 = box.n == 1 ? box.x[k] * box.x[k]
                               : box.x[k / M] * box.x[k / M] + box.x[k % M] * box.x[k % M];
        w[k] = std::exp(-r2);
    }
    return w;
}

MinimizeResult minimize_rayleigh(const ProblemParams& params, const Potential& V,
                                 const RadialTransformPlan& plan, const MinimizeConfig& cfg,
                                 const std::vector<double>& w0) {
    RadialDisc D(plan, params.s, shift_of(cfg, V), V, params.p);
    return gradient_flow(D, D.V, cfg, w0);
}

MinimizeResult minimize_rayleigh(const ProblemParams& params, const Potential& V,
                                 const RadialTransformPlan& plan, const MinimizeConfig& cfg) {
    return minimize_rayleigh(params, V, plan, cfg,
                             initial_guess(params, V, plan.grid(), cfg.initial));
}

MinimizeResult minimize_box(const ProblemParams& params, const Potential& V, const BoxGrid& box,
                            const MinimizeConfig& cfg, const std::vector<double>& w0) {
    BoxDisc D(box, params.s, shift_of(cfg, V), V, params.p);
    return gradient_flow(D, D.V, cfg, w0);
}

double el_residual(const RadialField& u, double s, const Potential& V, double p,
                   const RadialTransformPlan& plan) {
    const RadialGrid& g = plan.grid();
    FracOp op(plan, s);
    double beta = u.tail ? *u.tail : op.tail_hint(u.u);
    std::vector<double> Lu = op.apply(u.u, beta);
    std::vector<double> v = sample_V(V, g);
    double a = 0.0, b = 0.0;
    for (int i = 0; i < g.N; ++i) {
        double nl = std::pow(std::abs(u.u[i]), p - 1.0);
        double r = Lu[i] + v[i] * u.u[i] - nl;
        a += g.w[i] * r * r;
        b += g.w[i] * nl * nl;
    }
    return std::sqrt(a / b);
}

namespace {

void pohozaev_sides(const RadialField& u, const ProblemParams& pr, const Potential& V,
                    const RadialGrid& g, double& up, double& rhs) {
    std::vector<double> v = sample_V(V, g), xd = sample_x_dot_gradV(V, g);
    up = 0.0;
    rhs = 0.0;
    for (int i = 0; i < g.N; ++i) {
        up += g.w[i] * std::pow(std::abs(u.u[i]), pr.p);
        rhs += g.w[i] * (v[i] + xd[i] / (2.0 * pr.s)) * u.u[i] * u.u[i];
    }
}

}  // namespace

double pohozaev_residual(const RadialField& u, const ProblemParams& params, const Potential& V,
                         const RadialGrid& g) {
    double up, rhs;
    pohozaev_sides(u, params, V, g, up, rhs);
    double lhs = (params.s - params.s0) / params.s * up;
    return std::abs(lhs - rhs) / std::abs(rhs);
}

double pohozaev_residual_printed(const RadialField& u, const ProblemParams& params,
                                 const Potential& V, const RadialGrid& g) {
    double up, rhs;
    pohozaev_sides(u, params, V, g, up, rhs);
    double lhs = (params.s - params.s0) / params.n * up;
    return std::abs(lhs - rhs) / std::abs(rhs);
}

GroundState to_ground_state(const MinimizeResult& res, const ProblemParams& params,
                            const Potential& V, const RadialTransformPlan& plan) {
    const RadialGrid& g = plan.grid();
    GroundState gs;
    gs.params = params;
    gs.S_V = res.S_V;
    gs.iterations = res.iterations;
    gs.converged = res.converged;
    gs.stop_reason = res.stop_reason;
    double c = std::pow(res.S_V, 1.0 / (params.p - 2.0));
    gs.u.u = res.w;
    for (double& x : gs.u.u) x *= c;

    FracOp op(plan, params.s);
    double beta = op.tail_hint(gs.u.u);
    std::vector<double> v = sample_V(V, g);
    std::vector<double> Lw = op.apply(res.w, op.tail_hint(res.w));
    double num = 0.0, wp = 0.0;
    for (int i = 0; i < g.N; ++i) {
        num += g.w[i] * (Lw[i] + v[i] * res.w[i]) * res.w[i];
        wp += g.w[i] * std::pow(res.w[i], params.p);
    }
    gs.lambda = num / wp;

    gs.kinetic = op.seminorm(gs.u.u, beta);
    double pot = 0.0;
    for (int i = 0; i < g.N; ++i) pot += g.w[i] * v[i] * gs.u.u[i] * gs.u.u[i];
    gs.potential = g.area() * pot;
    gs.lp_pow = lp_norm_pow(gs.u, g, params.p);

    SupNorm sn = sup_norm(gs.u, g);
    gs.sup = sn.value;
    gs.x_s = 0.0;  // radial: peak pinned to the center
    gs.mu_s = std::pow(sn.value, -1.0 / params.alpha_s);
    gs.residual_el = el_residual(gs.u, params.s, V, params.p, plan);
    gs.residual_pohozaev = pohozaev_residual(gs.u, params, V, g);
    gs.residual_pohozaev_printed = pohozaev_residual_printed(gs.u, params, V, g);
    return gs;
}

BoxGroundState to_ground_state(const MinimizeResult& res, const ProblemParams& params,
                               const Potential& V, const BoxGrid& box) {
    BoxGroundState gs;
    gs.params = params;
    gs.S_V = res.S_V;
    gs.iterations = res.iterations;
    gs.converged = res.converged;
    gs.stop_reason = res.stop_reason;
    double c = std::pow(res.S_V, 1.0 / (params.p - 2.0));
    gs.u.u = res.w;
    for (double& x : gs.u.u) x *= c;
    // first strict maximum in row-major order = lexicographically smallest lattice point
    for (std::size_t k = 0; k < gs.u.u.size(); ++k) {
        if (gs.u.u[k] > gs.sup) {
            gs.sup = gs.u.u[k];
            gs.peak_index = int(k);
        }
    }
    const int M = box.M;
    if (box.n == 1)
        gs.x_s = {box.x[gs.peak_index]};
    else
        gs.x_s = {box.x[gs.peak_index / M], box.x[gs.peak_index % M]};
    gs.mu_s = std::pow(gs.sup, -1.0 / params.alpha_s);

    BoxOperator op(box, params.s);
    std::vector<double> Lu = op.apply(gs.u.u);
    std::vector<double> v = sample_V(V, box);
    double a = 0.0, b = 0.0, up = 0.0;
    for (std::size_t k = 0; k < Lu.size(); ++k) {
        double nl = std::pow(gs.u.u[k], params.p - 1.0);
        double r = Lu[k] + v[k] * gs.u.u[k] - nl;
        a += r * r;
        b += nl * nl;
        up += std::pow(gs.u.u[k], params.p);
    }
    gs.residual_el = std::sqrt(a / b);
    gs.lp_pow = box.cell_volume() * up;
    return gs;
}

}  // namespace fgs
