#include "fgs/constants.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace fgs {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr double kLanczos[9] = {0.99999999999980993,  676.5203681218851,
                                -1259.1392167224028,  771.32342877765313,
                                -176.61502916214059,  12.507343278686905,
                                -0.13857109526572012, 9.9843695780195716e-6,
                                1.5056327351493116e-7};

std::complex<double> lanczos(std::complex<double> z) {
    z -= 1.0;
    std::complex<double> x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
    std::complex<double> t = z + 7.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

void check_s(double s, int n) {
    if (!(s > 0.0) || !(2.0 * s < n)) throw ConfigError("order s must lie in (0, n/2)");
}

}  // namespace

double gamma_ln(double x) {
    if (!(x > 0.0)) throw ConfigError("gamma_ln requires x > 0");
    return std::lgamma(x);
}

std::complex<double> gamma_ln(std::complex<double> z) {
    std::complex<double> shift = 0.0;
    while (z.real() < 0.5) {
        if (z.imag() == 0.0 && z.real() == std::round(z.real()))
            return {std::numeric_limits<double>::infinity(), 0.0};
        shift -= std::log(z);
        z += 1.0;
    }
    return lanczos(z) + shift;
}

double coeff_D(int n, double s) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("coeff_D requires 0 < s < 1");
    return std::exp(-0.5 * n * std::log(kPi) + 2.0 * s * std::log(2.0) +
                    gamma_ln(0.5 * n + s) - gamma_ln(2.0 - s)) *
           s * (1.0 - s);
}

double sobolev_S(int n, double s) {
    check_s(s, n);
    return std::exp(2.0 * s * std::log(2.0) + s * std::log(kPi) + gamma_ln(0.5 * n + s) -
                    gamma_ln(0.5 * n - s));
}

double sobolev_S_sharp(int n, double s) {
    return sobolev_S(n, s) *
           std::exp(2.0 * s / n * (gamma_ln(0.5 * n) - gamma_ln(double(n))));
}

double lambda_scale(int n, double s) {
    check_s(s, n);
    return 2.0 * std::exp((gamma_ln(0.5 * n + s) - gamma_ln(0.5 * n - s)) / (2.0 * s));
}

double lambda_scale_printed(int n, double s) {
    check_s(s, n);
    return 2.0 * std::exp(0.5 * (gamma_ln(0.5 * n + s) - gamma_ln(0.5 * n - s)));
}

double kappa_ext(double s) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("kappa_ext requires 0 < s < 1");
    return std::exp((1.0 - 2.0 * s) * std::log(2.0) + gamma_ln(1.0 - s) - gamma_ln(s));
}

BubbleSpec make_bubble(int n, double s) { return make_bubble(n, s, 1.0); }

BubbleSpec make_bubble(int n, double s, double scale) {
    if (!(scale > 0.0)) throw ConfigError("bubble scale must be positive");
    return {n, s, lambda_scale(n, s) * scale};
}

double bubble_eval(const BubbleSpec& b, double r) {
    double z = r / b.lambda_s;
    return std::exp(-0.5 * (b.n - 2.0 * b.s) * std::log1p(z * z));
}

RadialField bubble_field(const BubbleSpec& b, const RadialGrid& g) {
    RadialField f;
    f.u.resize(g.N);
    for (int i = 0; i < g.N; ++i) f.u[i] = bubble_eval(b, g.r[i]);
    f.tail = b.n - 2.0 * b.s;
    return f;
}

double blowup_A(int n, double s0) {
    if (!(n > 4.0 * s0) || !(s0 > 0.0)) throw ConfigError("blowup_A requires 0 < 4 s0 < n");
    return n * std::exp(gamma_ln(0.5 * n - 2.0 * s0) + gamma_ln(double(n)) -
                        gamma_ln(n - 2.0 * s0) - gamma_ln(0.5 * n));
}

double integrate_half_line(const std::function<double(double)>& f, double rel_tol) {
    // x = exp(pi/2 sinh t), trapezoid in t on [-T, T]
    const double T = 6.5;
    double prev = 0.0;
    for (int level = 0; level < 14; ++level) {
        double step = 0.5 / (1 << level);
        int K = int(T / step);
        double acc = 0.0;
        for (int k = -K; k <= K; ++k) {
            double t = k * step;
            double x = std::exp(0.5 * kPi * std::sinh(t));
            acc += f(x) * x * 0.5 * kPi * std::cosh(t);
        }
        acc *= step;
        if (level > 0 && std::abs(acc - prev) <= rel_tol * std::abs(acc)) return acc;
        prev = acc;
    }
    return prev;
}

double blowup_A_quadrature(int n, double s0) {
    if (!(n > 4.0 * s0) || !(s0 > 0.0)) throw ConfigError("blowup_A requires 0 < 4 s0 < n");
    double q2 = n - 2.0 * s0;
    auto l1 = [](double r) { return r > 1e100 ? 2.0 * std::log(r) : std::log1p(r * r); };
    auto f2 = [&](double r) { return std::exp(-q2 * l1(r) + (n - 1) * std::log(r)); };
    auto fp = [&](double r) { return std::exp(-n * l1(r) + (n - 1) * std::log(r)); };
    return n * integrate_half_line(f2) / integrate_half_line(fp);
}

}  // namespace fgs
