#include "fgs/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>

#include "fgs/constants.hpp"

namespace fgs {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Fritsch-Carlson slopes on a uniform grid.
std::vector<double> pchip_slopes(const std::vector<double>& u, double h) {
    const std::size_t N = u.size();
    std::vector<double> d(N - 1), m(N);
    for (std::size_t k = 0; k + 1 < N; ++k) d[k] = (u[k + 1] - u[k]) / h;
    m[0] = d[0];
    m[N - 1] = d[N - 2];
    for (std::size_t k = 1; k + 1 < N; ++k)
        m[k] = d[k - 1] * d[k] <= 0.0 ? 0.0 : 2.0 / (1.0 / d[k - 1] + 1.0 / d[k]);
    return m;
}

double predicted_mu(const ProblemParams& pr, const Potential& V) {
    double A = blowup_A(pr.n, pr.s0);
    return std::pow((pr.s - pr.s0) / (pr.s0 / pr.n * A * V.V0()), 1.0 / (2.0 * pr.s));
}

}  // namespace

std::vector<double> resample(const std::vector<double>& u, double beta,
                             const RadialTransformPlan& plan, double scale, bool* out_of_range) {
    const RadialGrid& g = plan.grid();
    const int N = g.N;
    const double h = g.h, t0 = std::log(g.r_min);
    auto [a, b] = plan.inner_fit(u);
    std::vector<double> m = pchip_slopes(u, h);
    std::vector<double> out(N);
    bool oor = false;
    for (int i = 0; i < N; ++i) {
        double r = g.r[i] / scale;
        if (r <= g.r[plan.k2()]) {
            out[i] = a + b * r * r;
        } else if (r >= g.r_max) {
            if (r > g.r_max * (1.0 + 1e-12)) oor = true;
            out[i] = u[N - 1] * std::pow(r / g.r_max, -beta);
        } else {
            double x = (std::log(r) - t0) / h;
            int k = std::clamp(int(std::floor(x)), 0, N - 2);
            double t = x - k;
            double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
            double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
            out[i] = h00 * u[k] + h10 * h * m[k] + h01 * u[k + 1] + h11 * h * m[k + 1];
        }
    }
    if (out_of_range) *out_of_range = oor;
    return out;
}

RadialField rescale_profile(const GroundState& gs, const RadialTransformPlan& plan,
                            bool* out_of_range) {
    const ProblemParams& pr = gs.params;
    if (!(gs.mu_s > 0.0)) throw ConfigError("rescale requires mu_s > 0");
    FracOp op(plan, pr.s);
    double beta = op.tail_hint(gs.u.u);
    RadialField v;
    v.u = resample(gs.u.u, beta, plan, 1.0 / gs.mu_s, out_of_range);
    double c = std::pow(gs.mu_s, pr.alpha_s);
    for (double& x : v.u) x *= c;
    v.tail = beta;
    return v;
}

BubbleDistance bubble_distance(const RadialField& v, const ProblemParams& params,
                               const RadialGrid& g) {
    RadialField Q = bubble_field(make_bubble(params.n, params.s0), g);
    RadialField d;
    d.u.resize(g.N);
    BubbleDistance out;
    for (int i = 0; i < g.N; ++i) {
        d.u[i] = v.u[i] - Q.u[i];
        out.sup = std::max(out.sup, std::abs(d.u[i]));
    }
    d.tail = v.tail ? std::min(*v.tail, *Q.tail) : *Q.tail;
    out.lp = lp_norm(d, g, params.p);
    out.lp_rel = out.lp / lp_norm(Q, g, params.p);
    return out;
}

double blowup_ratio(const GroundState& gs, const Potential& V) {
    const ProblemParams& pr = gs.params;
    return (pr.s - pr.s0) * std::pow(gs.mu_s, -2.0 * pr.s) / (blowup_A(pr.n, pr.s0) * V.V0());
}

double blowup_ratio_sup_form(const GroundState& gs, const Potential& V) {
    const ProblemParams& pr = gs.params;
    return (pr.s - pr.s0) * std::pow(gs.sup, pr.p - 2.0) / (blowup_A(pr.n, pr.s0) * V.V0());
}

double eta_s(const ProblemParams& pr, const Potential& V) {
    double base = blowup_A(pr.n, pr.s0) * eval_V_radial(V, 0.0);
    return std::pow(base, -1.0 / (2.0 * pr.s)) * std::pow(pr.s - pr.s0, 1.0 / (2.0 * pr.s));
}

double decay_exponent_fit(const RadialField& v, const RadialGrid& g, double r_a, double r_b) {
    if (!(r_a > 0.0 && r_b > r_a) || r_a < g.r[0] || r_b > g.r_max)
        throw ConfigError("decay window underresolved");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (int i = 0; i < g.N; ++i) {
        if (g.r[i] < r_a || g.r[i] > r_b) continue;
        if (!(v.u[i] > 10.0 * std::numeric_limits<double>::min()))
            throw ConfigError("decay window underresolved");
        double x = std::log(g.r[i]), y = std::log(v.u[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    if (k < 3) throw ConfigError("decay window underresolved");
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

ConcentrationReport concentration_report(const GroundState& gs, const Potential& V,
                                         const RadialGrid& g, double eps) {
    const ProblemParams& pr = gs.params;
    ConcentrationReport c;
    c.V_at_peak = eval_V_radial(V, gs.x_s);
    c.inf_V = V.V0();
    c.gap = c.V_at_peak - c.inf_V;
    c.eps = eps > 0.0 ? eps : 5.0 * lambda_scale(pr.n, pr.s0) * gs.mu_s;
    double ball = 0.0;
    for (int i = 0; i < g.N && g.r[i] <= c.eps; ++i) ball += g.w[i] * std::pow(gs.u.u[i], pr.p);
    ball *= g.area();
    c.mass_fraction = ball / std::pow(sobolev_S_sharp(pr.n, pr.s0), pr.p / (pr.p - 2.0));
    c.mass_fraction_total = ball / gs.lp_pow;
    return c;
}

ConcentrationReport concentration_report(const BoxGroundState& gs, const Potential& V,
                                         const BoxGrid& box, double eps) {
    const ProblemParams& pr = gs.params;
    ConcentrationReport c;
    c.V_at_peak = eval_V(V, gs.x_s);
    c.inf_V = V.V0();
    c.gap = c.V_at_peak - c.inf_V;
    c.eps = eps > 0.0 ? eps : 5.0 * box.dx;
    const int M = box.M;
    auto image = [&](double d) { return d - 2.0 * box.L * std::round(d / (2.0 * box.L)); };
    double ball = 0.0;
    for (std::size_t k = 0; k < gs.u.u.size(); ++k) {
        double r2;
        if (box.n == 1) {
            double e = image(box.x[k] - gs.x_s[0]);
            r2 = e * e;
        } else {
            double ex = image(box.x[k / M] - gs.x_s[0]), ey = image(box.x[k % M] - gs.x_s[1]);
            r2 = ex * ex + ey * ey;
        }
        if (r2 <= c.eps * c.eps) ball += std::pow(gs.u.u[k], pr.p);
    }
    ball *= box.cell_volume();
    c.mass_fraction = ball / std::pow(sobolev_S_sharp(pr.n, pr.s0), pr.p / (pr.p - 2.0));
    c.mass_fraction_total = ball / gs.lp_pow;
    return c;
}

double lp_distance(const std::vector<double>& a, const std::vector<double>& b, const RadialGrid& g,
                   double p) {
    RadialField d;
    d.u.resize(g.N);
    for (int i = 0; i < g.N; ++i) d.u[i] = a[i] - b[i];
    return lp_norm(d, g, p);
}

std::vector<std::string> sweep_columns() {
    return {"s",
            "S_V",
            "mu_s",
            "x_s",
            "eta_s",
            "bubble_lp_dist",
            "bubble_lp_rel",
            "bubble_sup_dist",
            "blowup_ratio",
            "blowup_ratio_corrected",
            "decay_exponent_fit",
            "decay_target",
            "V_at_peak",
            "gap",
            "mass_fraction",
            "S_rel_to_S0",
            "pohozaev_residual",
            "pohozaev_residual_printed",
            "el_residual",
            "iterations",
            "converged",
            "valid"};
}

std::vector<std::string> sweep_row_values(const SweepRow& r) {
    return {fmt17(r.s),
            fmt17(r.S_V),
            fmt17(r.mu_s),
            fmt17(r.x_s),
            fmt17(r.eta_s),
            fmt17(r.bubble_lp_dist),
            fmt17(r.bubble_lp_rel),
            fmt17(r.bubble_sup_dist),
            fmt17(r.blowup_ratio),
            fmt17(r.blowup_ratio_corrected),
            fmt17(r.decay_exponent_fit),
            fmt17(r.decay_target),
            fmt17(r.V_at_peak),
            fmt17(r.gap),
            fmt17(r.mass_fraction),
            fmt17(r.S_rel_to_S0),
            fmt17(r.pohozaev_residual),
            fmt17(r.pohozaev_residual_printed),
            fmt17(r.el_residual),
            std::to_string(r.iterations),
            r.converged ? "1" : "0",
            r.valid ? "1" : "0"};
}

TrendCheck trend_non_increasing(const std::string& name, const std::vector<double>& x) {
    TrendCheck t{name, true, 0};
    bool small = true;
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (x[k] > x[k - 1]) {
            ++t.violations;
            if (x[k] > 1.1 * x[k - 1]) small = false;
        }
    }
    t.pass = t.violations == 0 || (t.violations == 1 && small);
    return t;
}

SweepRow make_sweep_row(const GroundState& gs, const Potential& V, const RadialTransformPlan& plan,
                        const SweepConfig& cfg) {
    const ProblemParams& pr = gs.params;
    const RadialGrid& g = plan.grid();
    SweepRow row;
    row.s = pr.s;
    row.S_V = gs.S_V;
    row.mu_s = gs.mu_s;
    row.x_s = gs.x_s;
    row.iterations = gs.iterations;
    row.converged = gs.converged;
    row.stop_reason = gs.stop_reason;
    row.el_residual = gs.residual_el;
    row.pohozaev_residual = gs.residual_pohozaev;
    row.pohozaev_residual_printed = gs.residual_pohozaev_printed;
    row.decay_target = -(pr.n - 2.0 * pr.s);
    row.S_rel_to_S0 = gs.S_V / sobolev_S_sharp(pr.n, pr.s0) - 1.0;
    if (pr.subcritical && 4.0 * pr.s0 < pr.n) {
        row.eta_s = eta_s(pr, V);
        RadialField v = rescale_profile(gs, plan);
        BubbleDistance bd = bubble_distance(v, pr, g);
        row.bubble_lp_dist = bd.lp;
        row.bubble_lp_rel = bd.lp_rel;
        row.bubble_sup_dist = bd.sup;
        row.blowup_ratio = blowup_ratio(gs, V);
        row.blowup_ratio_corrected = row.blowup_ratio * pr.n / pr.s0;
        double lam = lambda_scale(pr.n, pr.s0);
        row.decay_exponent_fit =
            decay_exponent_fit(v, g, cfg.decay_window_lo * lam, cfg.decay_window_hi * lam);
    }
    ConcentrationReport c = concentration_report(gs, V, g);
    row.V_at_peak = c.V_at_peak;
    row.gap = c.gap;
    row.mass_fraction = c.mass_fraction;
    row.valid = gs.converged;
    return row;
}

SweepResult sweep(int n, double p, std::vector<double> s_list, const Potential& V,
                  const RadialTransformPlan& plan, const SweepConfig& cfg) {
    std::sort(s_list.begin(), s_list.end(), std::greater<double>());
    SweepResult out;
    auto solve_one = [&](double s, const std::vector<double>* warm, double warm_scale) {
        ProblemParams pr = make_params(n, p, s);
        MinimizeResult mr;
        if (warm) {
            FracOp op(plan, s);
            std::vector<double> w0 = resample(*warm, op.tail_hint(*warm), plan, warm_scale);
            mr = minimize_rayleigh(pr, V, plan, cfg.solver, w0);
        } else {
            mr = minimize_rayleigh(pr, V, plan, cfg.solver);
        }
        return to_ground_state(mr, pr, V, plan);
    };
    if (cfg.warm_start) {
        int prev = -1;
        for (double s : s_list) {
            GroundState gs;
            if (prev >= 0) {
                const GroundState& last = out.states[prev];
                ProblemParams a = last.params, b = make_params(n, p, s);
                double scale = 1.0;
                if (a.s - a.s0 < 0.1 && b.subcritical && 4.0 * b.s0 < n)
                    scale = predicted_mu(b, V) / predicted_mu(a, V);
                gs = solve_one(s, &last.u.u, scale);
            } else {
                gs = solve_one(s, nullptr, 1.0);
            }
            out.states.push_back(gs);
            if (gs.converged) prev = int(out.states.size()) - 1;
        }
    } else {
        std::vector<std::future<GroundState>> jobs;
        for (double s : s_list)
            jobs.push_back(std::async(std::launch::async, [&, s] { return solve_one(s, nullptr, 1.0); }));
        for (auto& j : jobs) out.states.push_back(j.get());
    }
    std::vector<double> ratio_dev, dist, gap;
    for (const GroundState& gs : out.states) {
        SweepRow row = make_sweep_row(gs, V, plan, cfg);
        out.all_converged = out.all_converged && row.converged;
        out.rows.push_back(row);
        if (!row.valid) continue;
        ratio_dev.push_back(std::abs(row.blowup_ratio - 1.0));
        dist.push_back(row.bubble_lp_dist);
        gap.push_back(row.gap);
    }
    out.trends.push_back(trend_non_increasing("blowup_ratio_deviation", ratio_dev));
    out.trends.push_back(trend_non_increasing("bubble_lp_dist", dist));
    out.trends.push_back(trend_non_increasing("gap", gap));
    return out;
}

BoxSweepResult box_sweep(int n, double p, std::vector<double> s_list, const Potential& V,
                         const BoxGrid& box, const MinimizeConfig& cfg) {
    std::sort(s_list.begin(), s_list.end(), std::greater<double>());
    BoxSweepResult out;
    std::vector<double> w;
    std::vector<double> gap;
    for (double s : s_list) {
        ProblemParams pr = make_params(n, p, s);
        if (w.empty()) w = initial_guess(pr, box);
        MinimizeResult mr = minimize_box(pr, V, box, cfg, w);
        BoxGroundState gs = to_ground_state(mr, pr, V, box);
        ConcentrationReport c = concentration_report(gs, V, box);
        BoxSweepRow row;
        row.s = s;
        row.S_V = gs.S_V;
        row.mu_s = gs.mu_s;
        row.x_s = gs.x_s;
        row.V_at_peak = c.V_at_peak;
        row.gap = c.gap;
        double d2 = 0.0;
        for (std::size_t k = 0; k < gs.x_s.size(); ++k) {
            double c0 = k < V.x0.size() ? V.x0[k] : 0.0;
            d2 += (gs.x_s[k] - c0) * (gs.x_s[k] - c0);
        }
        row.peak_dist_cells = std::sqrt(d2) / box.dx;
        row.mass_fraction = c.mass_fraction;
        row.mass_fraction_total = c.mass_fraction_total;
        row.el_residual = gs.residual_el;
        row.iterations = gs.iterations;
        row.converged = gs.converged;
        out.all_converged = out.all_converged && gs.converged;
        out.rows.push_back(row);
        gap.push_back(row.gap);
        if (mr.converged) w = mr.w;
    }
    out.trends.push_back(trend_non_increasing("gap", gap));
    return out;
}

ProbeResult subcritical_probe(const ProblemParams& params, const Potential& V,
                              const RadialTransformPlan& plan, const MinimizeConfig& cfg) {
    if (params.s > params.s0 + 1e-12) throw ConfigError("probe requires s <= s0");
    MinimizeConfig c = cfg;
    c.stop_on_collapse = true;
    c.tol_stall = 0.0;
    std::vector<double> w0 = bubble_field(make_bubble(params.n, params.s), plan.grid()).u;
    MinimizeResult mr = minimize_rayleigh(params, V, plan, c, w0);
    ProbeResult pr;
    pr.trace = mr.trace;
    pr.S0 = sobolev_S_sharp(params.n, params.s0);
    pr.collapsed = mr.collapsed;
    pr.stop_reason = mr.stop_reason;
    pr.min_energy = mr.trace.front().energy;
    double prev = -1.0;
    for (const TracePoint& t : mr.trace) {
        pr.min_energy = std::min(pr.min_energy, t.energy);
        double u = t.sup;
        if (prev >= 0.0 && u < prev) ++pr.sup_decreases;
        if (prev < 0.0) pr.sup_initial = u;
        prev = u;
    }
    pr.sup_final = prev;
    pr.final_energy = mr.trace.back().energy;
    return pr;
}

UniquenessResult uniqueness_probe(const ProblemParams& params, const Potential& V,
                                  const RadialTransformPlan& plan, const MinimizeConfig& cfg, int K,
                                  std::uint64_t seed, double amplitude) {
    if (K < 1) throw ConfigError("uniqueness probe needs K >= 1");
    const RadialGrid& g = plan.grid();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double base = 1.0;
    if (params.subcritical && params.s - params.s0 < 0.1 && 4.0 * params.s0 < params.n)
        base = predicted_mu(params, V);
    UniquenessResult out;
    out.K = K;
    std::vector<std::vector<double>> us;
    const double centers[5] = {0.25, 0.5, 1.0, 2.0, 4.0};
    for (int k = 0; k < K; ++k) {
        double scale = base * (1.0 + 0.3 * U(rng));
        BubbleSpec b = make_bubble(params.n, params.s, scale);
        double c[5];
        for (double& x : c) x = U(rng);
        std::vector<double> w0(g.N);
        for (int i = 0; i < g.N; ++i) {
            double bump = 0.0;
            for (int j = 0; j < 5; ++j) {
                double z = std::log(g.r[i] / (centers[j] * b.lambda_s));
                bump += c[j] * std::exp(-z * z);
            }
            w0[i] = bubble_eval(b, g.r[i]) * (1.0 + amplitude * bump);
        }
        MinimizeResult mr = minimize_rayleigh(params, V, plan, cfg, w0);
        GroundState gs = to_ground_state(mr, params, V, plan);
        out.all_converged = out.all_converged && gs.converged;
        out.S_values.push_back(gs.S_V);
        out.residuals.push_back(gs.residual_el);
        us.push_back(gs.u.u);
    }
    double sup1 = 0.0;
    for (double x : us[0]) sup1 = std::max(sup1, std::abs(x));
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            double d = 0.0;
            for (int m = 0; m < g.N; ++m) d = std::max(d, std::abs(us[i][m] - us[j][m]));
            out.max_sup_dist = std::max(out.max_sup_dist, d / sup1);
            out.max_S_dist =
                std::max(out.max_S_dist, std::abs(out.S_values[i] - out.S_values[j]) / out.S_values[0]);
        }
    }
    return out;
}

}  // namespace fgs
