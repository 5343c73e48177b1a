#include "fgs/core_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fgs {

double ProblemParams::two_star_s() const {
    if (2.0 * s >= n) throw ConfigError("two_star_s undefined for s >= n/2");
    return 2.0 * n / (n - 2.0 * s);
}

ProblemParams make_params(int n, double p, double s) {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(p > 2.0)) throw ConfigError("p must exceed 2");
    if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s must lie in (0, 1]");
    if (n >= 3 && !(p < 2.0 * n / (n - 2.0)))
        throw ConfigError("p must be below 2n/(n-2)");
    ProblemParams q;
    q.n = n;
    q.p = p;
    q.s = s;
    q.s0 = (p - 2.0) * n / (2.0 * p);
    q.alpha_s = 2.0 * s / (p - 2.0);
    q.subcritical = s > q.s0;
    return q;
}

Mapping parse_mapping(const std::string& name) {
    if (name == "log") return Mapping::log;
    if (name == "algebraic") return Mapping::algebraic;
    throw ConfigError("unknown grid mapping '" + name + "'");
}

std::string mapping_name(Mapping m) { return m == Mapping::log ? "log" : "algebraic"; }

double RadialGrid::area() const {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double RadialGrid::integrate_radial(const std::vector<double>& f) const {
    double acc = 0.0;
    for (int i = 0; i < N; ++i) acc += w[i] * f[i];
    return acc;
}

double RadialGrid::integrate(const std::vector<double>& f) const {
    return area() * integrate_radial(f);
}

double power_tail(int n, double r_max, double c, double beta, double k) {
    double e = k * beta - n;
    if (e <= 0.0) return std::numeric_limits<double>::infinity();
    return std::pow(std::abs(c), k) * std::pow(r_max, n) / e;
}

namespace {

// Trapezoid in t = log x of f x^n, ball below x_0, half weight at the end.
std::vector<double> log_weights(const std::vector<double>& x, int n, bool uniform, double h) {
    std::size_t N = x.size();
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) {
        double tl = i > 0 ? std::log(x[i] / x[i - 1]) : 0.0;
        double tr = i + 1 < N ? std::log(x[i + 1] / x[i]) : 0.0;
        w[i] = 0.5 * (tl + tr) * std::pow(x[i], n);
    }
    if (uniform)
        w[0] = h * std::pow(x[0], n) / (-std::expm1(-n * h));
    else
        w[0] += std::pow(x[0], n) / n;
    return w;
}

}  // namespace

RadialGrid build_radial_grid(int n, int N, double r_max, Mapping mapping, double r_min,
                             double tail_tol) {
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(r_max > 1.0)) throw ConfigError("r_max must exceed 1");
    if (!(r_min > 0.0 && r_min < 1.0)) throw ConfigError("r_min must lie in (0, 1)");
    if (!(tail_tol > 0.0)) throw ConfigError("tail tolerance must be positive");
    // Reference profile (1+r^2)^{-n}: tail beyond r_max is below r_max^{-n}/n.
    double ref = std::exp(2.0 * std::lgamma(0.5 * n) - std::lgamma(double(n))) / 2.0;
    double tail = std::pow(r_max, -n) / n / ref;
    if (tail > tail_tol)
        throw ConfigError("truncation too small: reference tail " + std::to_string(tail) +
                          " exceeds tolerance");
    if (N < 64) throw ConfigError("N must be >= 64");

    RadialGrid g;
    g.n = n;
    g.N = N;
    g.r_min = r_min;
    g.r_max = r_max;
    g.mapping = mapping;
    g.tail_tol = tail_tol;
    g.r.resize(N);
    double span = std::log(r_max / r_min);
    if (mapping == Mapping::log) {
        g.h = span / (N - 1);
        for (int i = 0; i < N; ++i) g.r[i] = r_min * std::exp(g.h * i);
    } else {
        double a = span / std::log(double(N));
        for (int i = 0; i < N; ++i) g.r[i] = r_max * std::pow(double(i + 1) / N, a);
        g.h = 0.0;
    }
    g.r[N - 1] = r_max;
    g.rho.resize(N);
    for (int j = 0; j < N; ++j) g.rho[j] = 1.0 / g.r[N - 1 - j];
    bool uni = mapping == Mapping::log;
    g.w = log_weights(g.r, n, uni, g.h);
    g.wrho = log_weights(g.rho, n, uni, g.h);
    return g;
}

std::size_t BoxGrid::size() const {
    std::size_t k = 1;
    for (int d = 0; d < n; ++d) k *= std::size_t(M);
    return k;
}

double BoxGrid::cell_volume() const { return std::pow(dx, n); }

BoxGrid make_box_grid(int n, double L, int M) {
    if (n != 1 && n != 2) throw ConfigError("box mode supports n = 1 or 2");
    if (!(L > 0.0)) throw ConfigError("box half-length must be positive");
    if (M < 4 || (M & (M - 1)) != 0) throw ConfigError("box M must be a power of two");
    BoxGrid b;
    b.n = n;
    b.L = L;
    b.M = M;
    b.dx = 2.0 * L / M;
    b.x.resize(M);
    for (int i = 0; i < M; ++i) b.x[i] = -L + b.dx * i;
    return b;
}

}  // namespace fgs
