#include "fgs/frac_op.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fgs/constants.hpp"

namespace fgs {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

int next_pow2(int x) {
    int m = 1;
    while (m < x) m <<= 1;
    return m;
}

// Mellin multiplier of the radial Fourier transform:  pi^{a-n/2} Gamma((n-a)/2) / Gamma(a/2).
cplx hankel_kernel(int n, cplx a) {
    return std::exp((a - 0.5 * n) * std::log(kPi) + gamma_ln(0.5 * (double(n) - a)) -
                    gamma_ln(0.5 * a));
}

// Mellin multiplier of (-Delta)^s acting on r^{-a}.
cplx fraclap_kernel(int n, double s, cplx a) {
    return std::exp(2.0 * s * std::log(2.0) + gamma_ln(0.5 * (a + 2.0 * s)) +
                    gamma_ln(0.5 * (double(n) - a)) - gamma_ln(0.5 * a) -
                    gamma_ln(0.5 * (double(n) - a - 2.0 * s)));
}

std::vector<cplx> hankel_table(const RadialTransformPlan& P, double b) {
    const auto& tau = P.tau();
    const auto& f = P.filter();
    std::vector<cplx> G(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k)
        G[k] = hankel_kernel(P.n(), cplx(b, -tau[k])) * std::sqrt(f[k]);
    G.back() = 0.0;
    return G;
}

std::vector<double> hankel_apply(const RadialTransformPlan& P, const std::vector<cplx>& G,
                                 const std::vector<double>& U, double b, bool inverse) {
    const int M = P.M(), n = P.n();
    const auto& x = inverse ? P.rho() : P.R();
    const auto& xo = inverse ? P.R() : P.rho();
    std::vector<double> tmp(M);
    for (int j = 0; j < M; ++j) tmp[j] = U[j] * std::pow(x[j], b);
    std::vector<cplx> c;
    P.rfft(tmp, c);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= G[k];
    P.irfft(c, tmp);
    std::vector<double> out(M);
    for (int j = 0; j < M; ++j) out[j] = tmp[M - 1 - j] / M * std::pow(xo[j], -(n - b));
    return out;
}

}  // namespace

RadialTransformPlan::RadialTransformPlan(const RadialGrid& grid) : grid_(grid) {
    if (grid.mapping != Mapping::log)
        throw ConfigError("radial transforms need the log mapping");
    const int N = grid.N;
    const double h = grid.h;
    int padR = int(std::ceil(12.0 / h));
    int padL = int(std::ceil(36.0 / h));
    M_ = next_pow2(N + padL + padR);
    padL_ = M_ - N - padR;
    k2_ = std::max(1, int(std::lround(std::log(2.0) / h)));
    if (2 * k2_ >= N) throw ConfigError("radial grid too coarse");
    R_.resize(M_);
    for (int j = 0; j < M_; ++j) R_[j] = grid.r_min * std::exp(h * (j - padL_));
    for (int i = 0; i < N; ++i) R_[padL_ + i] = grid.r[i];
    rho_.resize(M_);
    for (int j = 0; j < M_; ++j) rho_[j] = 1.0 / R_[M_ - 1 - j];
    int K = M_ / 2 + 1;
    tau_.resize(K);
    filt_.resize(K);
    for (int k = 0; k < K; ++k) tau_[k] = 2.0 * kPi * k / (M_ * h);
    for (int k = 0; k < K; ++k) filt_[k] = std::exp(-36.0 * std::pow(tau_[k] / tau_.back(), 16));

    std::vector<double> a(M_);
    std::vector<cplx> b(K);
    fwd_ = fftw_plan_dft_r2c_1d(M_, a.data(), reinterpret_cast<fftw_complex*>(b.data()),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_c2r_1d(M_, reinterpret_cast<fftw_complex*>(b.data()), a.data(),
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RadialTransformPlan::~RadialTransformPlan() {
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

double RadialTransformPlan::symbol_cap() const {
    // filter = 1/2 at tau/tau_max = (ln2/36)^{1/16}; rho at the matching Nyquist-like scale
    double frac = std::pow(std::log(2.0) / 36.0, 1.0 / 16.0);
    return frac * tau_.back() / (2.0 * kPi) / grid_.r_min;
}

void RadialTransformPlan::rfft(const std::vector<double>& in, std::vector<cplx>& out) const {
    out.resize(M_ / 2 + 1);
    std::vector<double> buf(in);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), buf.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void RadialTransformPlan::irfft(const std::vector<cplx>& in, std::vector<double>& out) const {
    out.resize(M_);
    std::vector<cplx> buf(in);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(buf.data()),
                         out.data());
}

std::pair<double, double> RadialTransformPlan::inner_fit(const std::vector<double>& u) const {
    int ka = k2_, kb = 2 * k2_;
    double ra = grid_.r[ka], rb = grid_.r[kb];
    double b = (u[kb] - u[ka]) / (rb * rb - ra * ra);
    return {u[ka] - b * ra * ra, b};
}

std::vector<double> RadialTransformPlan::smooth(const std::vector<double>& u) const {
    auto [a, b] = inner_fit(u);
    std::vector<double> v(u);
    for (int i = 0; i < k2_; ++i) v[i] = a + b * grid_.r[i] * grid_.r[i];
    return v;
}

std::vector<double> RadialTransformPlan::extend(const std::vector<double>& u, double beta) const {
    const int N = grid_.N;
    auto [a, b] = inner_fit(u);
    std::vector<double> U(M_);
    for (int j = 0; j < padL_ + k2_; ++j) U[j] = a + b * R_[j] * R_[j];
    for (int i = k2_; i < N; ++i) U[padL_ + i] = u[i];
    for (int j = padL_ + N; j < M_; ++j) U[j] = u[N - 1] * std::pow(R_[j] / grid_.r_max, -beta);
    return U;
}

double RadialTransformPlan::tail_slope(const std::vector<double>& u) const {
    const int N = grid_.N;
    double a = u[N - 1], b = u[N - 1 - k2_];
    if (a * b > 0.0) {
        double sl = std::log(b / a) / std::log(grid_.r[N - 1] / grid_.r[N - 1 - k2_]);
        return std::clamp(sl, 0.5, 3.0 * grid_.n);
    }
    return double(grid_.n);
}

std::vector<double> RadialTransformPlan::hankel(const std::vector<double>& U, double b,
                                                bool inverse) const {
    return hankel_apply(*this, hankel_table(*this, b), U, b, inverse);
}

namespace {

struct CacheRegistry {
    std::mutex mu;
    std::string dir;
    KernelCacheStats stats;
};

CacheRegistry& registry() {
    static CacheRegistry r;
    return r;
}

}  // namespace

void set_kernel_cache_dir(const std::string& dir) {
    auto& reg = registry();
    std::lock_guard<std::mutex> lock(reg.mu);
    reg.dir = dir;
    reg.stats = {};
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

KernelCacheStats kernel_cache_stats() {
    auto& reg = registry();
    std::lock_guard<std::mutex> lock(reg.mu);
    return reg.stats;
}

KernelTables cached_kernel_tables(const RadialTransformPlan& plan, double s) {
    auto& reg = registry();
    std::string dir;
    {
        std::lock_guard<std::mutex> lock(reg.mu);
        dir = reg.dir;
    }
    if (dir.empty()) return kernel_tables(plan, s);
    const auto& g = plan.grid();
    TransformCacheKey key{g.n, g.N, g.r_max, g.r_min, g.mapping, s};
    std::string path = (std::filesystem::path(dir) / cache_file_name(key)).string();
    KernelTables t;
    bool hit = read_kernel_cache(path, key, t) && t.cols == int(plan.tau().size());
    if (!hit) {
        t = kernel_tables(plan, s);
        // write-then-rename so concurrent readers never see a partial file
        std::string tmp = path + ".tmp" + std::to_string(std::hash<std::string>{}(path) ^
                                                         std::hash<const void*>{}(&t));
        write_kernel_cache(tmp, key, t);
        std::filesystem::rename(tmp, path);
    }
    std::lock_guard<std::mutex> lock(reg.mu);
    (hit ? reg.stats.hits : reg.stats.misses) += 1;
    return t;
}

FracOp::FracOp(const RadialTransformPlan& plan, double s, double shift, const KernelTables* cached)
    : plan_(plan), s_(s), shift_(shift) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("order s must lie in [0, 1]");
    const int n = plan.n(), M = plan.M();
    const auto& R = plan.R();
    const auto& f = plan.filter();
    KernelTables own;
    if (!cached) {
        own = cached_kernel_tables(plan, s);
        cached = &own;
    }
    const int K = int(f.size());
    if (cached->rows != 8 || cached->cols != K) throw ConfigError("kernel table shape mismatch");
    auto row = [&](int k) {
        std::vector<cplx> z(K);
        const double* re = cached->data.data() + std::size_t(2 * k) * K;
        const double* im = re + K;
        for (int j = 0; j < K; ++j) z[j] = cplx(re[j], im[j]);
        return z;
    };
    mellin_ = row(0);
    for (int k = 0; k < K; ++k) mellin_[k] *= f[k];
    mellin_.back() = 0.0;
    hank_hs_ = row(1);
    hank_pf_ = row(2);
    hank_pi_ = row(3);
    one_minus_B_.resize(M);
    LB_.resize(M);
    double c = std::exp(2.0 * s * std::log(2.0) + gamma_ln(0.5 * n + s) - gamma_ln(0.5 * n - s));
    for (int j = 0; j < M; ++j) {
        double z = std::log1p(R[j] * R[j] / (ell_ * ell_));
        one_minus_B_[j] = -std::expm1(-0.5 * (n - 2.0 * s) * z);
        LB_[j] = c * std::pow(ell_, -2.0 * s) * std::exp(-0.5 * (n + 2.0 * s) * z);
    }
}

double FracOp::tail_hint(const std::vector<double>& u) const {
    double n = plan_.n();
    return std::clamp(plan_.tail_slope(u), n - 2.0 * s_, n + 2.0 * s_);
}

std::vector<double> FracOp::apply(const std::vector<double>& u, double beta) const {
    if (s_ == 0.0) return u;
    const int M = plan_.M(), N = plan_.N(), pL = plan_.pad_left(), k2 = plan_.k2();
    const auto& R = plan_.R();
    const double qin = 1.0 - 2.0 * s_;
    // Subtract a * B_ell, whose image is known in closed form.
    auto [a, b] = plan_.inner_fit(u);
    std::vector<double> U = plan_.extend(u, beta);
    std::vector<double> W(M);
    for (int j = 0; j < M; ++j) {
        W[j] = j < pL + k2 ? b * R[j] * R[j] + a * one_minus_B_[j]
                           : (U[j] - a) + a * one_minus_B_[j];
        W[j] *= std::pow(R[j], qin);
    }
    std::vector<cplx> c;
    plan_.rfft(W, c);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= mellin_[k];
    plan_.irfft(c, W);
    std::vector<double> out(N);
    for (int i = 0; i < N; ++i) {
        int j = pL + i;
        out[i] = W[j] / M * std::pow(R[j], -(qin + 2.0 * s_)) + a * LB_[j];
    }
    return out;
}

double FracOp::seminorm(const std::vector<double>& u, double beta) const {
    const int n = plan_.n(), M = plan_.M();
    const double b = 0.25 * (n - 2.0 * s_);
    std::vector<double> U = plan_.extend(u, beta);
    std::vector<double> uh = hankel_apply(plan_, hank_hs_, U, b, false);
    const auto& rho = plan_.rho();
    double acc = 0.0;
    for (int j = 0; j < M; ++j)
        acc += std::pow(rho[j], n) * std::pow(2.0 * kPi * rho[j], 2.0 * s_) * uh[j] * uh[j];
    return plan_.grid().area() * plan_.h() * acc;
}

std::vector<double> FracOp::precondition(const std::vector<double>& g) const {
    const int n = plan_.n(), M = plan_.M(), N = plan_.N(), pL = plan_.pad_left();
    const auto& R = plan_.R();
    const auto& rho = plan_.rho();
    const double bg = n - 2.0 * s_;
    std::vector<double> G(M);
    for (int j = 0; j < pL; ++j) G[j] = g[0];
    for (int i = 0; i < N; ++i) G[pL + i] = g[i];
    for (int j = pL + N; j < M; ++j) G[j] = g[N - 1] * std::pow(R[j] / plan_.grid().r_max, -bg);
    std::vector<double> gh = hankel_apply(plan_, hank_pf_, G, 0.5 * bg, false);
    for (int j = 0; j < M; ++j) gh[j] /= std::pow(2.0 * kPi * rho[j], 2.0 * s_) + shift_;
    std::vector<double> out = hankel_apply(plan_, hank_pi_, gh, 0.5 * n + s_, true);
    return std::vector<double>(out.begin() + pL, out.begin() + pL + N);
}

RadialField apply_fraclap_radial(const RadialField& u, double s, const RadialTransformPlan& plan) {
    FracOp op(plan, s);
    double beta = u.tail ? *u.tail : op.tail_hint(u.u);
    return {op.apply(u.u, beta), std::nullopt};
}

double hs_seminorm(const RadialField& u, double s, const RadialTransformPlan& plan) {
    FracOp op(plan, s);
    double beta = u.tail ? *u.tail : op.tail_hint(u.u);
    return op.seminorm(u.u, beta);
}

std::vector<double> hankel_forward(const RadialField& u, const RadialTransformPlan& plan) {
    double beta = u.tail ? *u.tail : plan.tail_slope(u.u);
    double b = std::min(0.5 * plan.n(), 0.5 * beta);
    std::vector<double> out = plan.hankel(plan.extend(u.u, beta), b, false);
    int off = plan.pad_right();
    return std::vector<double>(out.begin() + off, out.begin() + off + plan.N());
}

std::vector<double> hankel_inverse(const std::vector<double>& uhat, double beta_hat,
                                   const RadialTransformPlan& plan) {
    const int M = plan.M(), N = plan.N(), off = plan.pad_right();
    const auto& rho = plan.rho();
    double rho_max = plan.grid().rho[N - 1];
    std::vector<double> U(M);
    for (int j = 0; j < off; ++j) U[j] = uhat[0];
    for (int j = 0; j < N; ++j) U[off + j] = uhat[j];
    for (int j = off + N; j < M; ++j) U[j] = uhat[N - 1] * std::pow(rho[j] / rho_max, -beta_hat);
    double b = std::min(0.5 * plan.n(), 0.5 * beta_hat);
    std::vector<double> out = plan.hankel(U, b, true);
    int pL = plan.pad_left();
    return std::vector<double>(out.begin() + pL, out.begin() + pL + N);
}

double lp_norm_pow(const RadialField& u, const RadialGrid& g, double p) {
    double acc = 0.0;
    for (int i = 0; i < g.N; ++i) acc += g.w[i] * std::pow(std::abs(u.u[i]), p);
    if (u.tail) acc += power_tail(g.n, g.r_max, u.u[g.N - 1], *u.tail, p);
    return g.area() * acc;
}

double lp_norm(const RadialField& u, const RadialGrid& g, double p) {
    return std::pow(lp_norm_pow(u, g, p), 1.0 / p);
}

SupNorm sup_norm(const RadialField& u, const RadialGrid& g) {
    SupNorm s;
    for (int i = 0; i < g.N; ++i) {
        double v = std::abs(u.u[i]);
        if (v > s.value) {
            s.value = v;
            s.index = i;
        }
    }
    s.location = g.r[s.index];
    return s;
}

BoxOperator::BoxOperator(const BoxGrid& box, double s) : box_(box) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("order s must lie in [0, 1]");
    const int M = box.M;
    const int last = M / 2 + 1;
    nc_ = box.n == 1 ? last : M * last;
    sym_.resize(nc_);
    auto freq = [&](int i) { return (i < M / 2 ? i : i - M) / (M * box.dx); };
    for (int c = 0; c < nc_; ++c) {
        double k2 = 0.0;
        if (box.n == 1) {
            double k = c / (M * box.dx);
            k2 = k * k;
        } else {
            double kx = freq(c / last), ky = (c % last) / (M * box.dx);
            k2 = kx * kx + ky * ky;
        }
        double k = std::sqrt(k2);
        sym_[c] = k == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(2.0 * kPi * k, 2.0 * s);
    }
    std::vector<double> a(box.size());
    std::vector<cplx> b(nc_);
    auto* bc = reinterpret_cast<fftw_complex*>(b.data());
    if (box.n == 1) {
        fwd_ = fftw_plan_dft_r2c_1d(M, a.data(), bc, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_c2r_1d(M, bc, a.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    } else {
        fwd_ = fftw_plan_dft_r2c_2d(M, M, a.data(), bc, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_c2r_2d(M, M, bc, a.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
}

BoxOperator::~BoxOperator() {
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void BoxOperator::forward(const std::vector<double>& in, std::vector<cplx>& out) const {
    if (in.size() != box_.size()) throw ConfigError("box field shape mismatch");
    out.resize(nc_);
    std::vector<double> buf(in);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), buf.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void BoxOperator::backward(const std::vector<cplx>& in, std::vector<double>& out) const {
    out.resize(box_.size());
    std::vector<cplx> buf(in);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_), reinterpret_cast<fftw_complex*>(buf.data()),
                         out.data());
    double scale = 1.0 / double(box_.size());
    for (double& v : out) v *= scale;
}

std::vector<double> BoxOperator::apply(const std::vector<double>& u) const {
    std::vector<cplx> c;
    forward(u, c);
    for (int k = 0; k < nc_; ++k) c[k] *= sym_[k];
    std::vector<double> out;
    backward(c, out);
    return out;
}

double BoxOperator::seminorm(const std::vector<double>& u) const {
    std::vector<cplx> c;
    forward(u, c);
    const int last = box_.M / 2 + 1;
    double acc = 0.0;
    for (int k = 0; k < nc_; ++k) {
        int kl = k % last;
        double mult = (kl == 0 || kl == box_.M / 2) ? 1.0 : 2.0;
        acc += mult * sym_[k] * std::norm(c[k]);
    }
    return acc * box_.cell_volume() / double(box_.size());
}

std::vector<double> BoxOperator::precondition(const std::vector<double>& g, double shift) const {
    std::vector<cplx> c;
    forward(g, c);
    for (int k = 0; k < nc_; ++k) c[k] /= sym_[k] + shift;
    std::vector<double> out;
    backward(c, out);
    return out;
}

BoxField apply_fraclap_box(const BoxField& u, const BoxGrid& box, double s) {
    BoxOperator op(box, s);
    return {op.apply(u.u)};
}

namespace {

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.resize(m);
    w.resize(m);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

double sphere_area(int d) {  // |S^{d-1}| in R^d
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double oracle_pass(const std::function<double(double)>& u, int n, double s, double r,
                   const OracleOptions& opt, int rho_nodes) {
    std::vector<double> tx, tw, px, pw;
    gauss_legendre(opt.theta_nodes, tx, tw);
    gauss_legendre(rho_nodes, px, pw);
    const double ur = u(r);
    const double scale = std::max(r, 1.0);
    const double eps = 1e-3 * std::min(r > 0 ? r : 1.0, 1.0);
    const double rho_max = opt.rho_max_factor * scale;

    // Average of the symmetric second difference over the sphere, relative to |S^{n-2}|.
    auto inner = [&](double rho) {
        double acc = 0.0;
        for (int k = 0; k < opt.theta_nodes; ++k) {
            double th = 0.5 * kPi * (tx[k] + 1.0);
            double c = std::cos(th), sn = std::sin(th);
            double dp = std::sqrt(std::max(0.0, r * r + rho * rho + 2.0 * r * rho * c));
            double dm = std::sqrt(std::max(0.0, r * r + rho * rho - 2.0 * r * rho * c));
            double wt = n == 2 ? 1.0 : std::pow(sn, n - 2);
            acc += tw[k] * wt * (0.5 * (u(dp) + u(dm)) - ur);
        }
        return 0.5 * kPi * acc;
    };

    std::vector<double> cuts{eps};
    while (cuts.back() < rho_max) cuts.push_back(cuts.back() * 1.5);
    if (r > eps) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double a = cuts[k], b = cuts[k + 1];
        for (int j = 0; j < rho_nodes; ++j) {
            double rho = 0.5 * (a + b) + 0.5 * (b - a) * px[j];
            total += 0.5 * (b - a) * pw[j] * std::pow(rho, -1.0 - 2.0 * s) * inner(rho);
        }
    }
    const double Sn2 = n == 2 ? 2.0 : sphere_area(n - 1);
    const double D = coeff_D(n, s);
    double value = -D * Sn2 * total;

    // Ball of radius eps: second-order Taylor term with a finite-difference Laplacian.
    double hd = r > 0.0 ? std::min(1e-3 * scale, 0.25 * r) : 1e-3;
    double lap;
    if (r == 0.0) {
        lap = n * (u(hd) - ur) * 2.0 / (hd * hd);
    } else {
        double up = u(r + hd), um = u(r - hd);
        lap = (up - 2.0 * ur + um) / (hd * hd) + (n - 1.0) / r * (up - um) / (2.0 * hd);
    }
    value -= D * sphere_area(n) * lap / (2.0 * n) * std::pow(eps, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    // Far field: u(y) negligible, the -u(r) part integrates exactly.
    value += D * sphere_area(n) * ur * std::pow(cuts.back(), -2.0 * s) / (2.0 * s);
    return value;
}

}  // namespace

double singular_integral_oracle(const std::function<double(double)>& u, int n, double s, double r,
                                const OracleOptions& opt) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("oracle requires 0 < s < 1");
    if (n < 2) throw ConfigError("oracle requires n >= 2");
    double v1 = oracle_pass(u, n, s, r, opt, 16);
    double v2 = oracle_pass(u, n, s, r, opt, 24);
    double scale = std::max({std::abs(v2), std::abs(u(r)), 1e-300});
    if (std::abs(v1 - v2) > opt.tol * scale)
        throw ConvergenceError("singular integral quadrature did not converge at r = " +
                               std::to_string(r));
    return v2;
}

KernelTables kernel_tables(const RadialTransformPlan& plan, double s) {
    KernelTables t;
    const int n = plan.n();
    std::vector<std::vector<cplx>> rows;
    {
        std::vector<cplx> m(plan.tau().size());
        for (std::size_t k = 0; k < m.size(); ++k)
            m[k] = fraclap_kernel(n, s, cplx(1.0 - 2.0 * s, -plan.tau()[k]));
        rows.push_back(m);
    }
    rows.push_back(hankel_table(plan, 0.25 * (n - 2.0 * s)));
    rows.push_back(hankel_table(plan, 0.5 * (n - 2.0 * s)));
    rows.push_back(hankel_table(plan, 0.5 * n + s));
    t.rows = int(2 * rows.size());
    t.cols = int(plan.tau().size());
    t.data.reserve(std::size_t(t.rows) * t.cols);
    for (const auto& r : rows) {
        for (const auto& z : r) t.data.push_back(z.real());
        for (const auto& z : r) t.data.push_back(z.imag());
    }
    return t;
}

std::string cache_file_name(const TransformCacheKey& key) {
    std::ostringstream os;
    os.precision(17);
    os << "fgs_kernel_n" << key.n << "_N" << key.N << "_rmax" << key.r_max << "_rmin" << key.r_min
       << "_" << mapping_name(key.mapping) << "_s" << key.s << ".bin";
    return os.str();
}

namespace {

constexpr char kMagic[8] = {'F', 'G', 'S', 'K', 'E', 'R', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

struct CacheHeader {
    char magic[8];
    std::uint32_t version;
    std::int32_t n, N, mapping;
    double r_max, r_min, s;
    std::uint64_t rows, cols;
};

}  // namespace

void write_kernel_cache(const std::string& path, const TransformCacheKey& key,
                        const KernelTables& t) {
    CacheHeader h{};
    std::memcpy(h.magic, kMagic, 8);
    h.version = kVersion;
    h.n = key.n;
    h.N = key.N;
    h.mapping = key.mapping == Mapping::log ? 0 : 1;
    h.r_max = key.r_max;
    h.r_min = key.r_min;
    h.s = key.s;
    h.rows = std::uint64_t(t.rows);
    h.cols = std::uint64_t(t.cols);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write cache file " + path);
    f.write(reinterpret_cast<const char*>(&h), sizeof h);
    f.write(reinterpret_cast<const char*>(t.data.data()),
            std::streamsize(t.data.size() * sizeof(double)));
}

bool read_kernel_cache(const std::string& path, const TransformCacheKey& key, KernelTables& t) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    CacheHeader h{};
    if (!f.read(reinterpret_cast<char*>(&h), sizeof h)) return false;
    if (std::memcmp(h.magic, kMagic, 8) != 0 || h.version != kVersion) return false;
    if (h.n != key.n || h.N != key.N || h.mapping != (key.mapping == Mapping::log ? 0 : 1) ||
        h.r_max != key.r_max || h.r_min != key.r_min || h.s != key.s)
        return false;
    t.rows = int(h.rows);
    t.cols = int(h.cols);
    t.data.resize(h.rows * h.cols);
    return bool(f.read(reinterpret_cast<char*>(t.data.data()),
                       std::streamsize(t.data.size() * sizeof(double))));
}

}  // namespace fgs
