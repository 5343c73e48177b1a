#include "fgs/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "fgs/constants.hpp"

namespace fgs {

namespace {

using json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    double x = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size() || !std::isfinite(x))
        throw ConfigError("key " + key + ": expected a number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    long long x = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
        throw ConfigError("key " + key + ": expected an integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("key " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::string t = trim(v);
    if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
    std::vector<std::string> out;
    if (trim(t).empty()) return out;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : config_schema())
        if (k.name == name) return &k;
    return nullptr;
}

std::string short_name(const std::string& key) { return key.substr(key.find('.') + 1); }

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double lap() {
        auto t1 = std::chrono::steady_clock::now();
        double dt = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return dt;
    }
};

// Single writer for one run directory.
class RunWriter {
public:
    RunWriter(const RunConfig& cfg) : dir_(cfg.text("output.dir")) {
        for (const auto& f : split_list(cfg.text("output.formats"))) formats_.insert(trim(f));
        std::filesystem::create_directories(dir_);
    }

    void csv(const std::string& name, const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
        if (!formats_.count("csv")) return;
        std::ofstream f(path(name));
        if (!f) throw ConfigError("cannot write " + path(name));
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) f << (i ? "," : "") << v[i];
            f << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }

    void json_file(const std::string& name, const json& j) {
        if (!formats_.count("json")) return;
        write_text(name, j.dump(2) + "\n");
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream f(path(name));
        if (!f) throw ConfigError("cannot write " + path(name));
        f << text;
    }

private:
    std::string dir_;
    std::set<std::string> formats_;
    std::string path(const std::string& name) const {
        return (std::filesystem::path(dir_) / name).string();
    }
};

double safe(double (*f)(int, double), int n, double s) {
    try {
        return f(n, s);
    } catch (const std::exception&) {
        return kNaN;
    }
}

void fill_derived(RunManifest& m, const RunConfig& cfg) {
    int n = cfg.integer("problem.n");
    double p = cfg.real("problem.p");
    double s0 = (p - 2.0) * n / (2.0 * p);
    double lam = safe(lambda_scale, n, s0);
    double A = safe(blowup_A, n, s0);
    m.derived = {{"s0", s0},
                 {"S_n_s0", safe(sobolev_S_sharp, n, s0)},
                 {"S_n_s0_printed", safe(sobolev_S, n, s0)},
                 {"lambda_s0", lam},
                 {"A_n_s0", A}};
    if (!cfg.box_mode()) {
        // Core of the bubble must sit well above the innermost node.
        double mu_min = 100.0 * cfg.real("grid.r_min") / lam;
        Potential V = cfg.potential();
        m.resolvable_mu_min = mu_min;
        m.resolvable_s_min = s0 + s0 / n * A * V.V0() * std::pow(mu_min, 2.0 * s0);
    }
}

json trends_json(const std::vector<TrendCheck>& t) {
    json j = json::object();
    for (const auto& c : t) j[c.name] = {{"pass", c.pass}, {"violations", c.violations}};
    return j;
}

std::vector<double> default_s_list(const RunConfig& cfg) {
    std::vector<double> s = cfg.real_list("problem.s_list");
    if (!s.empty()) return s;
    double s0 = cfg.params().s0;
    std::vector<double> offs = cfg.box_mode()
                                   ? std::vector<double>{0.4, 0.3, 0.2, 0.1, 0.05, 0.02}
                                   : std::vector<double>{0.05, 0.03, 0.02, 0.01};
    for (double d : offs)
        if (s0 + d <= 1.0) s.push_back(s0 + d);
    return s;
}

int cmd_constants(const RunConfig& cfg, RunWriter& wr, RunManifest& man, std::ostream& out) {
    std::vector<int> ns = cfg.integer_list("problem.n_list");
    if (ns.empty()) ns = {cfg.integer("problem.n")};
    std::vector<double> ss = cfg.real_list("problem.s_list");
    if (ss.empty()) ss = {cfg.real("problem.s")};
    double p = cfg.real("problem.p");
    std::vector<std::string> header = {"n", "s", "D", "S", "S_sharp", "lambda", "lambda_printed",
                                       "kappa", "p", "s0", "A", "A_quadrature"};
    std::vector<std::vector<std::string>> rows;
    Stopwatch sw;
    for (int n : ns) {
        double s0 = (p - 2.0) * n / (2.0 * p);
        double A = safe(blowup_A, n, s0);
        double Aq = safe(blowup_A_quadrature, n, s0);
        for (double s : ss) {
            double kappa = kNaN;
            try {
                kappa = kappa_ext(s);
            } catch (const std::exception&) {
            }
            rows.push_back({std::to_string(n), fmt17(s), fmt17(safe(coeff_D, n, s)),
                            fmt17(safe(sobolev_S, n, s)), fmt17(safe(sobolev_S_sharp, n, s)),
                            fmt17(safe(lambda_scale, n, s)),
                            fmt17(safe(lambda_scale_printed, n, s)), fmt17(kappa), fmt17(p),
                            fmt17(s0), fmt17(A), fmt17(Aq)});
        }
    }
    man.stages.push_back({"constants", sw.lap()});
    wr.csv("constants.csv", header, rows);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
    return 0;
}

int cmd_verify_bubble(const RunConfig& cfg, RunWriter& wr, RunManifest& man, std::ostream& out) {
    int n = cfg.integer("problem.n");
    double s = cfg.real("problem.s");
    double tol = cfg.real("verify.tol");
    Stopwatch sw;
    RadialGrid g = cfg.radial_grid();
    RadialTransformPlan plan(g);
    man.symbol_cap = plan.symbol_cap();
    man.stages.push_back({"plan", sw.lap()});
    RadialField Q = bubble_field(make_bubble(n, s), g);
    double ps = 2.0 * n / (n - 2.0 * s);
    FracOp op(plan, s);
    std::vector<double> LQ = op.apply(Q.u, n - 2.0 * s);
    // Compare away from the truncation radius, where the tail model dominates.
    const double r_window = g.r_max / 4.0;
    double err = 0.0, scale = 0.0;
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < g.N; ++i) {
        double t = std::pow(Q.u[i], ps - 1.0);
        if (g.r[i] <= r_window) {
            err = std::max(err, std::abs(LQ[i] - t));
            scale = std::max(scale, t);
        }
        rows.push_back({fmt17(g.r[i]), fmt17(Q.u[i]), fmt17(LQ[i]), fmt17(t)});
    }
    double residual = err / scale;
    Potential zero = constant_potential(1.0);
    zero.V_inf = 0.0;
    double E = eval_rayleigh(Q, s, zero, ps, plan);
    double S = sobolev_S_sharp(n, s);
    double rq_err = std::abs(E / S - 1.0);
    man.stages.push_back({"verify", sw.lap()});
    bool pass = residual <= tol && rq_err <= tol;
    wr.csv("verify_bubble.csv", {"r", "Q", "frac_lap_Q", "Q_pow"}, rows);
    wr.json_file("verify_bubble.json", {{"n", n},
                                        {"s", s},
                                        {"p", ps},
                                        {"residual_sup_rel", residual},
                                        {"residual_window_r_max", r_window},
                                        {"rayleigh", E},
                                        {"S_sharp", S},
                                        {"rayleigh_rel_err", rq_err},
                                        {"tol", tol},
                                        {"pass", pass}});
    char line[160];
    std::snprintf(line, sizeof line, "residual %.6e\nrayleigh_rel_err %.6e\n%s\n", residual,
                  rq_err, pass ? "PASS" : "FAIL");
    out << line;
    return pass ? 0 : 1;
}

json ground_state_json(const GroundState& gs) {
    return {{"n", gs.params.n},
            {"p", gs.params.p},
            {"s", gs.params.s},
            {"s0", gs.params.s0},
            {"S_V", gs.S_V},
            {"lambda", gs.lambda},
            {"mu_s", gs.mu_s},
            {"x_s", gs.x_s},
            {"sup", gs.sup},
            {"kinetic", gs.kinetic},
            {"potential", gs.potential},
            {"lp_pow", gs.lp_pow},
            {"S_V_pow", std::pow(gs.S_V, gs.params.p / (gs.params.p - 2.0))},
            {"residual_el", gs.residual_el},
            {"residual_pohozaev", gs.residual_pohozaev},
            {"residual_pohozaev_printed", gs.residual_pohozaev_printed},
            {"iterations", gs.iterations},
            {"converged", gs.converged},
            {"stop_reason", gs.stop_reason}};
}

int cmd_solve(const RunConfig& cfg, RunWriter& wr, RunManifest& man, std::ostream& out) {
    ProblemParams pr = cfg.params();
    Potential V = cfg.potential();
    MinimizeConfig mc = cfg.solver();
    Stopwatch sw;
    if (cfg.box_mode()) {
        BoxGrid box = cfg.box_grid();
        MinimizeResult res = minimize_box(pr, V, box, mc, initial_guess(pr, box));
        BoxGroundState gs = to_ground_state(res, pr, V, box);
        man.stages.push_back({"minimize", sw.lap()});
        man.symbol_cap = std::pow(2.0 * std::numbers::pi * std::sqrt(double(box.n)) * box.M /
                                      (4.0 * box.L),
                                  2.0 * pr.s);
        man.convergence.push_back({"solve", gs.converged});
        std::vector<std::string> header;
        for (int d = 0; d < box.n; ++d) header.push_back(d == 0 ? "x" : "y");
        header.push_back("u");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < box.size(); ++k) {
            std::vector<std::string> row;
            if (box.n == 2) {
                row.push_back(fmt17(box.x[k / box.M]));
                row.push_back(fmt17(box.x[k % box.M]));
            } else {
                row.push_back(fmt17(box.x[k]));
            }
            row.push_back(fmt17(gs.u.u[k]));
            rows.push_back(row);
        }
        wr.csv("solve.csv", header, rows);
        wr.json_file("solve.json", {{"n", pr.n},
                                    {"p", pr.p},
                                    {"s", pr.s},
                                    {"S_V", gs.S_V},
                                    {"mu_s", gs.mu_s},
                                    {"x_s", gs.x_s},
                                    {"sup", gs.sup},
                                    {"lp_pow", gs.lp_pow},
                                    {"residual_el", gs.residual_el},
                                    {"iterations", gs.iterations},
                                    {"converged", gs.converged},
                                    {"stop_reason", gs.stop_reason}});
        out << "S_V " << fmt17(gs.S_V) << "\nconverged " << gs.converged << '\n';
        return gs.converged ? 0 : 2;
    }
    RadialGrid g = cfg.radial_grid();
    RadialTransformPlan plan(g);
    man.symbol_cap = plan.symbol_cap();
    man.stages.push_back({"plan", sw.lap()});
    MinimizeResult res = minimize_rayleigh(pr, V, plan, mc);
    man.stages.push_back({"minimize", sw.lap()});
    GroundState gs = to_ground_state(res, pr, V, plan);
    man.stages.push_back({"diagnostics", sw.lap()});
    man.convergence.push_back({"solve", gs.converged});
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < g.N; ++i) rows.push_back({fmt17(g.r[i]), fmt17(gs.u.u[i])});
    wr.csv("solve.csv", {"r", "u"}, rows);
    wr.json_file("solve.json", ground_state_json(gs));
    out << "S_V " << fmt17(gs.S_V) << "\nconverged " << gs.converged << '\n';
    return gs.converged ? 0 : 2;
}

int cmd_sweep(const RunConfig& cfg, RunWriter& wr, RunManifest& man, std::ostream& out) {
    int n = cfg.integer("problem.n");
    double p = cfg.real("problem.p");
    Potential V = cfg.potential();
    std::vector<double> s_list = default_s_list(cfg);
    Stopwatch sw;
    if (cfg.box_mode()) {
        BoxGrid box = cfg.box_grid();
        BoxSweepResult r = box_sweep(n, p, s_list, V, box, cfg.solver());
        man.stages.push_back({"box_sweep", sw.lap()});
        std::vector<std::string> header = {"s", "S_V", "mu_s"};
        for (int d = 0; d < box.n; ++d) header.push_back("x_s_" + std::to_string(d));
        for (const char* c : {"V_at_peak", "gap", "peak_dist_cells", "mass_fraction",
                              "mass_fraction_total", "el_residual", "iterations", "converged"})
            header.push_back(c);
        std::vector<std::vector<std::string>> rows;
        json jr = json::array();
        for (const auto& x : r.rows) {
            std::vector<std::string> row = {fmt17(x.s), fmt17(x.S_V), fmt17(x.mu_s)};
            for (double c : x.x_s) row.push_back(fmt17(c));
            for (double c : {x.V_at_peak, x.gap, x.peak_dist_cells, x.mass_fraction,
                             x.mass_fraction_total, x.el_residual})
                row.push_back(fmt17(c));
            row.push_back(std::to_string(x.iterations));
            row.push_back(x.converged ? "1" : "0");
            rows.push_back(row);
            jr.push_back({{"s", x.s}, {"converged", x.converged}});
            man.convergence.push_back({"s=" + fmt17(x.s), x.converged});
        }
        wr.csv("sweep.csv", header, rows);
        bool trends_ok = std::all_of(r.trends.begin(), r.trends.end(),
                                     [](const TrendCheck& t) { return t.pass; });
        wr.json_file("sweep.json", {{"mode", "box"},
                                    {"rows", jr},
                                    {"trends", trends_json(r.trends)},
                                    {"all_converged", r.all_converged},
                                    {"trends_pass", trends_ok}});
        out << "rows " << r.rows.size() << "\nall_converged " << r.all_converged << '\n';
        if (!r.all_converged) return 2;
        return trends_ok ? 0 : 1;
    }
    RadialGrid g = cfg.radial_grid();
    RadialTransformPlan plan(g);
    man.symbol_cap = plan.symbol_cap();
    man.stages.push_back({"plan", sw.lap()});
    SweepResult r = sweep(n, p, s_list, V, plan, cfg.sweep());
    man.stages.push_back({"sweep", sw.lap()});
    std::vector<std::vector<std::string>> rows;
    json jr = json::array();
    for (const auto& x : r.rows) {
        rows.push_back(sweep_row_values(x));
        jr.push_back({{"s", x.s},
                      {"converged", x.converged},
                      {"valid", x.valid},
                      {"stop_reason", x.stop_reason}});
        man.convergence.push_back({"s=" + fmt17(x.s), x.converged});
    }
    wr.csv("sweep.csv", sweep_columns(), rows);
    bool trends_ok = std::all_of(r.trends.begin(), r.trends.end(),
                                 [](const TrendCheck& t) { return t.pass; });
    wr.json_file("sweep.json", {{"mode", "radial"},
                                {"rows", jr},
                                {"trends", trends_json(r.trends)},
                                {"all_converged", r.all_converged},
                                {"trends_pass", trends_ok}});
    out << "rows " << r.rows.size() << "\nall_converged " << r.all_converged << '\n';
    for (const auto& t : r.trends) out << "trend " << t.name << ' ' << (t.pass ? "PASS" : "FAIL") << '\n';
    if (!r.all_converged) return 2;
    return trends_ok ? 0 : 1;
}

int cmd_subcritical_probe(const RunConfig& cfg, RunWriter& wr, RunManifest& man,
                          std::ostream& out) {
    double delta = cfg.real("probe.delta");
    if (delta < 0.0) throw ConfigError("probe.delta must be >= 0 (probe runs at s = s0 - delta)");
    ProblemParams base = cfg.params();
    ProblemParams pr = cfg.params(base.s0 - delta);
    Potential V = cfg.potential();
    MinimizeConfig mc = cfg.solver();
    mc.max_iter = cfg.integer("probe.max_iter");
    Stopwatch sw;
    RadialGrid g = cfg.radial_grid();
    RadialTransformPlan plan(g);
    man.symbol_cap = plan.symbol_cap();
    man.stages.push_back({"plan", sw.lap()});
    ProbeResult r = subcritical_probe(pr, V, plan, mc);
    man.stages.push_back({"probe", sw.lap()});
    std::vector<std::vector<std::string>> rows;
    for (const auto& t : r.trace)
        rows.push_back({std::to_string(t.iter), fmt17(t.energy), fmt17(t.energy / r.S0),
                        fmt17(t.residual), fmt17(t.step), fmt17(t.sup), fmt17(t.half_radius)});
    wr.csv("probe.csv",
           {"iter", "energy", "energy_over_S0", "residual", "step", "sup", "half_radius"}, rows);
    bool pass;
    json checks;
    if (delta == 0.0) {
        double floor = cfg.real("probe.energy_floor");
        bool above = r.min_energy >= floor * r.S0;
        bool grows = r.sup_decreases == 0 && r.sup_final > r.sup_initial;
        pass = above && grows;
        checks = {{"energy_above_floor", above}, {"sup_grows", grows}, {"floor", floor}};
    } else {
        double frac = cfg.real("probe.drop_fraction");
        pass = r.min_energy < frac * r.S0;
        checks = {{"energy_drops", pass}, {"drop_fraction", frac}};
    }
    wr.json_file("probe.json", {{"s", pr.s},
                                {"s0", pr.s0},
                                {"S0", r.S0},
                                {"min_energy", r.min_energy},
                                {"min_energy_over_S0", r.min_energy / r.S0},
                                {"final_energy", r.final_energy},
                                {"sup_initial", r.sup_initial},
                                {"sup_final", r.sup_final},
                                {"sup_decreases", r.sup_decreases},
                                {"collapsed", r.collapsed},
                                {"stop_reason", r.stop_reason},
                                {"iterations", r.trace.empty() ? 0 : r.trace.back().iter},
                                {"checks", checks},
                                {"pass", pass}});
    out << "min_energy_over_S0 " << fmt17(r.min_energy / r.S0) << '\n'
        << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 1;
}

int cmd_uniqueness_probe(const RunConfig& cfg, RunWriter& wr, RunManifest& man,
                         std::ostream& out) {
    ProblemParams pr = cfg.params();
    Potential V = cfg.potential();
    Stopwatch sw;
    RadialGrid g = cfg.radial_grid();
    RadialTransformPlan plan(g);
    man.symbol_cap = plan.symbol_cap();
    man.stages.push_back({"plan", sw.lap()});
    UniquenessResult r =
        uniqueness_probe(pr, V, plan, cfg.solver(), cfg.integer("probe.K"),
                         std::uint64_t(cfg.integer("run.seed")), cfg.real("probe.amplitude"));
    man.stages.push_back({"probe", sw.lap()});
    man.convergence.push_back({"all_starts", r.all_converged});
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < r.S_values.size(); ++k)
        rows.push_back({std::to_string(k), fmt17(r.S_values[k]), fmt17(r.residuals[k])});
    wr.csv("uniqueness.csv", {"start", "S_V", "residual_el"}, rows);
    double tol = cfg.real("probe.uniq_tol");
    bool pass = r.all_converged && r.max_sup_dist <= tol;
    wr.json_file("uniqueness.json", {{"s", pr.s},
                                     {"K", r.K},
                                     {"seed", cfg.integer("run.seed")},
                                     {"max_sup_dist", r.max_sup_dist},
                                     {"max_S_dist", r.max_S_dist},
                                     {"all_converged", r.all_converged},
                                     {"tol", tol},
                                     {"pass", pass}});
    out << "max_sup_dist " << fmt17(r.max_sup_dist) << '\n' << (pass ? "PASS" : "FAIL") << '\n';
    if (!r.all_converged) return 2;
    return pass ? 0 : 1;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> keys = {
        {"problem.n", KeyType::integer, "4", "space dimension"},
        {"problem.p", KeyType::real, "3", "nonlinearity exponent, p > 2"},
        {"problem.s", KeyType::real, "0.8", "fractional order"},
        {"problem.s_list", KeyType::real_list, "", "sweep orders (sorted descending)"},
        {"problem.n_list", KeyType::integer_list, "", "dimensions for the constants table"},
        {"problem.mode", KeyType::text, "radial", "radial | box"},
        {"potential.kind", KeyType::text, "constant", "constant | well"},
        {"potential.V_inf", KeyType::real, "1", "value at infinity"},
        {"potential.B", KeyType::real, "0.5", "well depth"},
        {"potential.m", KeyType::real, "1.2", "well exponent"},
        {"potential.w", KeyType::real, "1", "well width"},
        {"potential.x0", KeyType::real_list, "", "well center (box mode)"},
        {"grid.N", KeyType::integer, "1024", "radial nodes"},
        {"grid.r_max", KeyType::real, "400", "truncation radius"},
        {"grid.r_min", KeyType::real, "0.0001", "innermost radius"},
        {"grid.mapping", KeyType::text, "log", "log | algebraic"},
        {"grid.tail_tol", KeyType::real, "1e-6", "bubble tail mass tolerance"},
        {"grid.L", KeyType::real, "8", "box half width"},
        {"grid.M", KeyType::integer, "128", "box points per axis"},
        {"solver.max_iter", KeyType::integer, "20000", "iteration limit"},
        {"solver.tol_el", KeyType::real, "1e-6", "Euler-Lagrange residual tolerance"},
        {"solver.tol_stall", KeyType::real, "1e-15", "relative energy stall tolerance"},
        {"solver.stall_window", KeyType::integer, "100", "iterations in the stall window"},
        {"solver.shift", KeyType::real, "0", "preconditioner shift, <= 0 selects inf V"},
        {"solver.step0", KeyType::real, "1", "initial step"},
        {"solver.step_min", KeyType::real, "1e-14", "smallest backtracking step"},
        {"solver.energy_slack", KeyType::real, "1e-14", "relative rounding slack in the descent test"},
        {"solver.modulus_each_step", KeyType::boolean, "false", "take |w| after every step"},
        {"solver.collapse_factor", KeyType::real, "20", "collapse radius in units of r_min"},
        {"solver.initial", KeyType::text, "bubble", "bubble | plain"},
        {"sweep.warm_start", KeyType::boolean, "true", "start each order from the previous one"},
        {"sweep.decay_window_lo", KeyType::real, "5", "decay fit window start, units of lambda_s0"},
        {"sweep.decay_window_hi", KeyType::real, "20", "decay fit window end, units of lambda_s0"},
        {"probe.delta", KeyType::real, "0", "subcritical probe runs at s0 - delta"},
        {"probe.max_iter", KeyType::integer, "3000", "subcritical probe iteration limit"},
        {"probe.energy_floor", KeyType::real, "0.98", "energy floor at s0, units of S(n,s0)"},
        {"probe.drop_fraction", KeyType::real, "0.5", "energy target below s0, units of S(n,s0)"},
        {"probe.K", KeyType::integer, "5", "uniqueness probe starts"},
        {"probe.amplitude", KeyType::real, "0.2", "perturbation amplitude"},
        {"probe.uniq_tol", KeyType::real, "0.0001", "pairwise sup-relative tolerance"},
        {"verify.tol", KeyType::real, "0.001", "bubble residual tolerance"},
        {"output.dir", KeyType::text, "fgs_out", "artifact directory"},
        {"output.formats", KeyType::text, "csv,json", "subset of csv,json"},
        {"cache.enabled", KeyType::boolean, "false", "binary transform table cache"},
        {"cache.path", KeyType::text, ".fgs_cache", "cache directory"},
        {"run.seed", KeyType::integer, "20240601", "seed for probe perturbations"},
        {"run.strict", KeyType::boolean, "false", "reject potentials violating the assumptions"},
    };
    return keys;
}

std::string resolve_key(const std::string& name) {
    if (find_key(name)) return name;
    std::string hit;
    for (const auto& k : config_schema()) {
        if (short_name(k.name) != name) continue;
        if (!hit.empty()) return "";
        hit = k.name;
    }
    return hit;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const ConfigKey* k = find_key(key);
    if (!k) throw ConfigError("unknown key " + key);
    std::string canon;
    switch (k->type) {
        case KeyType::integer:
            canon = std::to_string(parse_int(key, value));
            break;
        case KeyType::real:
            canon = fmt17(parse_real(key, value));
            break;
        case KeyType::boolean:
            canon = parse_bool(key, value) ? "true" : "false";
            break;
        case KeyType::text:
            canon = trim(value);
            break;
        case KeyType::real_list: {
            std::vector<double> v;
            for (const auto& item : split_list(value)) v.push_back(parse_real(key, item));
            // orders are swept from the top down
            if (key == "problem.s_list") std::sort(v.begin(), v.end(), std::greater<>());
            for (std::size_t i = 0; i < v.size(); ++i) canon += (i ? "," : "") + fmt17(v[i]);
            break;
        }
        case KeyType::integer_list: {
            auto items = split_list(value);
            for (std::size_t i = 0; i < items.size(); ++i)
                canon += (i ? "," : "") + std::to_string(parse_int(key, items[i]));
            break;
        }
    }
    values[key] = canon;
    defaulted.erase(key);
}

const std::string& RunConfig::text(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("unknown key " + key);
    return it->second;
}

int RunConfig::integer(const std::string& key) const { return int(parse_int(key, text(key))); }
double RunConfig::real(const std::string& key) const { return parse_real(key, text(key)); }
bool RunConfig::boolean(const std::string& key) const { return parse_bool(key, text(key)); }

std::vector<double> RunConfig::real_list(const std::string& key) const {
    std::vector<double> v;
    for (const auto& item : split_list(text(key))) v.push_back(parse_real(key, item));
    return v;
}

std::vector<int> RunConfig::integer_list(const std::string& key) const {
    std::vector<int> v;
    for (const auto& item : split_list(text(key))) v.push_back(int(parse_int(key, item)));
    return v;
}

ProblemParams RunConfig::params() const { return params(real("problem.s")); }

ProblemParams RunConfig::params(double s) const {
    return make_params(integer("problem.n"), real("problem.p"), s);
}

Potential RunConfig::potential() const {
    const std::string& kind = text("potential.kind");
    std::vector<double> x0 = real_list("potential.x0");
    if (kind == "constant") return constant_potential(real("potential.V_inf"));
    if (kind == "well")
        return well_potential(real("potential.V_inf"), real("potential.B"), real("potential.m"),
                              real("potential.w"), x0);
    throw ConfigError("potential.kind must be constant or well");
}

MinimizeConfig RunConfig::solver() const {
    MinimizeConfig c;
    c.max_iter = integer("solver.max_iter");
    c.tol_el = real("solver.tol_el");
    c.tol_stall = real("solver.tol_stall");
    c.stall_window = integer("solver.stall_window");
    c.shift = real("solver.shift");
    c.step0 = real("solver.step0");
    c.step_min = real("solver.step_min");
    c.energy_slack = real("solver.energy_slack");
    c.modulus_each_step = boolean("solver.modulus_each_step");
    c.collapse_factor = real("solver.collapse_factor");
    c.initial = text("solver.initial");
    return c;
}

SweepConfig RunConfig::sweep() const {
    SweepConfig c;
    c.solver = solver();
    c.warm_start = boolean("sweep.warm_start");
    c.decay_window_lo = real("sweep.decay_window_lo");
    c.decay_window_hi = real("sweep.decay_window_hi");
    return c;
}

RadialGrid RunConfig::radial_grid() const {
    return build_radial_grid(integer("problem.n"), integer("grid.N"), real("grid.r_max"),
                             parse_mapping(text("grid.mapping")), real("grid.r_min"),
                             real("grid.tail_tol"));
}

BoxGrid RunConfig::box_grid() const {
    return make_box_grid(integer("problem.n"), real("grid.L"), integer("grid.M"));
}

RunConfig default_config() {
    RunConfig c;
    for (const auto& k : config_schema()) c.set(k.name, k.default_value);
    for (const auto& k : config_schema()) c.defaulted.insert(k.name);
    return c;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg = default_config();
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto c = line.find_first_of("#;");
        if (c != std::string::npos) line = line.substr(0, c);
        line = trim(line);
        if (line.empty()) continue;
        std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = std::any_of(config_schema().begin(), config_schema().end(),
                                     [&](const ConfigKey& k) {
                                         return k.name.compare(0, section.size() + 1,
                                                               section + ".") == 0;
                                     });
            if (!known) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        std::string name = trim(line.substr(0, eq));
        std::string key;
        if (!section.empty() && name.find('.') == std::string::npos)
            key = find_key(section + "." + name) ? section + "." + name : "";
        else
            key = resolve_key(name);
        if (key.empty()) throw ConfigError(where + "unknown key " + name);
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key " + key);
        try {
            cfg.set(key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    int n = cfg.integer("problem.n");
    double p = cfg.real("problem.p");
    double s = cfg.real("problem.s");
    if (n < 1) throw ConfigError("problem.n must be positive");
    if (!(p > 2.0)) throw ConfigError("problem.p must exceed 2");
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("problem.s must lie in (0, 1]");
    for (double x : cfg.real_list("problem.s_list"))
        if (!(x > 0.0 && x <= 1.0)) throw ConfigError("problem.s_list entries must lie in (0, 1]");
    const std::string& mode = cfg.text("problem.mode");
    if (mode != "radial" && mode != "box") throw ConfigError("problem.mode must be radial or box");
    const std::string& kind = cfg.text("potential.kind");
    if (kind != "constant" && kind != "well")
        throw ConfigError("potential.kind must be constant or well");
    parse_mapping(cfg.text("grid.mapping"));
    const std::string& init = cfg.text("solver.initial");
    if (init != "bubble" && init != "plain") throw ConfigError("solver.initial must be bubble or plain");
    if (cfg.integer("solver.max_iter") < 1) throw ConfigError("solver.max_iter must be positive");
    if (cfg.integer("solver.stall_window") < 1)
        throw ConfigError("solver.stall_window must be positive");
    for (const char* k : {"solver.tol_el", "solver.tol_stall", "solver.step0", "solver.step_min"})
        if (!(cfg.real(k) > 0.0)) throw ConfigError(std::string(k) + " must be positive");
    for (const auto& f : split_list(cfg.text("output.formats"))) {
        std::string t = trim(f);
        if (t != "csv" && t != "json") throw ConfigError("output.formats accepts csv and json");
    }
    if (cfg.integer("probe.K") < 2) throw ConfigError("probe.K must be at least 2");
    std::vector<double> x0 = cfg.real_list("potential.x0");
    if (!x0.empty()) {
        if (mode == "box" && int(x0.size()) != n)
            throw ConfigError("potential.x0 needs one coordinate per dimension");
        if (mode == "radial" && std::any_of(x0.begin(), x0.end(), [](double x) { return x != 0.0; }))
            throw ConfigError("radial mode needs the well centered at the origin");
    }
    Potential V = cfg.potential();
    if (cfg.strict()) {
        AssumptionReport rep = validate_assumptions(V, cfg.params());
        for (const auto& c : rep.checks)
            if (!c.pass) throw ConfigError("assumption " + c.name + " fails: " + c.detail);
    }
}

std::string manifest_json(const RunManifest& m) {
    json j;
    j["tool"] = "fgs";
    j["version"] = kToolVersion;
    j["command"] = m.command;
    json cfg = json::object();
    for (const auto& [k, v] : m.config) cfg[k] = {{"value", v}, {"default", m.defaulted.count(k) > 0}};
    j["config"] = cfg;
    json d = json::object();
    for (const auto& [k, v] : m.derived) d[k] = v;
    j["derived"] = d;
    json st = json::array();
    for (const auto& [k, v] : m.stages) st.push_back({{"stage", k}, {"seconds", v}});
    j["stages"] = st;
    json cv = json::object();
    for (const auto& [k, v] : m.convergence) cv[k] = v;
    j["convergence"] = cv;
    j["symbol_cap"] = m.symbol_cap;
    j["resolvability"] = {{"mu_min", m.resolvable_mu_min}, {"s_min", m.resolvable_s_min}};
    j["kernel_cache"] = {{"hits", m.cache_hits}, {"misses", m.cache_misses}};
    j["exit_code"] = m.exit_code;
    return j.dump(2) + "\n";
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out) {
    try {
        validate_config(cfg);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << '\n';
        return 3;
    }
    RunManifest man;
    man.command = command;
    for (const auto& [k, v] : cfg.values) man.config.push_back({k, v});
    man.defaulted = cfg.defaulted;
    fill_derived(man, cfg);
    set_kernel_cache_dir(cfg.boolean("cache.enabled") ? cfg.text("cache.path") : "");
    RunWriter wr(cfg);
    int code = 0;
    try {
        if (command == "constants")
            code = cmd_constants(cfg, wr, man, out);
        else if (command == "solve")
            code = cmd_solve(cfg, wr, man, out);
        else if (command == "sweep")
            code = cmd_sweep(cfg, wr, man, out);
        else if (command == "verify-bubble")
            code = cmd_verify_bubble(cfg, wr, man, out);
        else if (command == "subcritical-probe")
            code = cmd_subcritical_probe(cfg, wr, man, out);
        else if (command == "uniqueness-probe")
            code = cmd_uniqueness_probe(cfg, wr, man, out);
        else
            throw ConfigError("unknown command " + command);
    } catch (const ConvergenceError& e) {
        out << "convergence failure: " << e.what() << '\n';
        code = 2;
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << '\n';
        set_kernel_cache_dir("");
        return 3;
    }
    KernelCacheStats cs = kernel_cache_stats();
    man.cache_hits = cs.hits;
    man.cache_misses = cs.misses;
    set_kernel_cache_dir("");
    man.exit_code = code;
    wr.write_text("manifest.json", manifest_json(man));
    return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional ground-state solver and asymptotic checks", "fgs"};
    app.require_subcommand(1);
    std::string config_path;
    bool strict = false;
    app.add_option("--config", config_path, "config file (flat [section] key = value)");
    app.add_flag("--strict", strict, "validate potential assumptions");
    std::map<std::string, std::string> flags;
    std::map<std::string, int> short_count;
    for (const auto& k : config_schema()) ++short_count[short_name(k.name)];
    for (const auto& k : config_schema()) {
        std::string names = "--" + k.name;
        std::string sn = short_name(k.name);
        if (short_count[sn] == 1 && sn != "strict") names += ",--" + sn;
        app.add_option(names, flags[k.name], k.help)->default_str(k.default_value);
    }
    const char* commands[] = {"constants", "solve", "sweep", "verify-bubble", "subcritical-probe",
                              "uniqueness-probe"};
    for (const char* c : commands) app.add_subcommand(c)->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    std::string command = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = default_config();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file " + config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = parse_config(ss.str());
        }
        for (const auto& k : config_schema()) {
            auto* opt = app.get_option("--" + k.name);
            if (opt->count() > 0) cfg.set(k.name, flags[k.name]);
        }
        if (strict) cfg.set("run.strict", "true");
        return run(command, cfg, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 3;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace fgs
