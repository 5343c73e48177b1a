#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fgs/core_model.hpp"

namespace fgs {

// Log-periodic extension of a log RadialGrid for FFT-based Mellin/Hankel transforms.
// Physical node i sits at index pad_left + i of the extended lattice R.
class RadialTransformPlan {
public:
    explicit RadialTransformPlan(const RadialGrid& grid);
    ~RadialTransformPlan();
    RadialTransformPlan(const RadialTransformPlan&) = delete;
    RadialTransformPlan& operator=(const RadialTransformPlan&) = delete;

    const RadialGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }
    int N() const { return grid_.N; }
    int M() const { return M_; }
    int pad_left() const { return padL_; }
    int pad_right() const { return M_ - grid_.N - padL_; }
    int k2() const { return k2_; }  // inner nodes slaved to the r^2 fit
    double h() const { return grid_.h; }

    const std::vector<double>& R() const { return R_; }
    const std::vector<double>& rho() const { return rho_; }  // 1 / R reversed
    const std::vector<double>& tau() const { return tau_; }  // Mellin frequencies
    const std::vector<double>& filter() const { return filt_; }

    // Radial frequency beyond which the symbol is damped below 1/2.
    double symbol_cap() const;

    // Unnormalized real FFT pair of length M (thread-safe).
    void rfft(const std::vector<double>& in, std::vector<std::complex<double>>& out) const;
    void irfft(const std::vector<std::complex<double>>& in, std::vector<double>& out) const;

    // a + b r^2 fitted through nodes k2 and 2 k2.
    std::pair<double, double> inner_fit(const std::vector<double>& u) const;
    // u with nodes below k2 replaced by the inner fit.
    std::vector<double> smooth(const std::vector<double>& u) const;
    // Extension to R: inner fit on the left, u_N (r/r_max)^{-beta} on the right.
    std::vector<double> extend(const std::vector<double>& u, double beta) const;
    // Log slope over the last k2 nodes, clamped to [0.5, 3n].
    double tail_slope(const std::vector<double>& u) const;

    // Hankel transform of an extended field with input power bias b.
    // Output lives on the conjugate lattice (rho for forward, R for inverse).
    std::vector<double> hankel(const std::vector<double>& U, double b, bool inverse) const;

private:
    RadialGrid grid_;
    int M_ = 0, padL_ = 0, k2_ = 1;
    std::vector<double> R_, rho_, tau_, filt_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

struct KernelTables;

// (-Delta)^s on a plan, with tables for fixed s and preconditioner shift.
class FracOp {
public:
    FracOp(const RadialTransformPlan& plan, double s, double shift = 1.0,
           const KernelTables* cached = nullptr);

    double s() const { return s_; }
    const RadialTransformPlan& plan() const { return plan_; }

    // Pointwise (-Delta)^s u at the physical nodes; beta is the tail exponent.
    std::vector<double> apply(const std::vector<double>& u, double beta) const;
    // int |(-Delta)^{s/2} u|^2 over R^n, from the frequency side.
    double seminorm(const std::vector<double>& u, double beta) const;
    // ((2 pi rho)^{2s} + shift)^{-1} applied in frequency space.
    std::vector<double> precondition(const std::vector<double>& g) const;
    // Tail exponent used for fields of this order: tail slope clamped to [n-2s, n+2s].
    double tail_hint(const std::vector<double>& u) const;

private:
    const RadialTransformPlan& plan_;
    double s_, shift_;
    double ell_ = 1.0;
    std::vector<std::complex<double>> mellin_, hank_hs_, hank_pf_, hank_pi_;
    std::vector<double> one_minus_B_, LB_;
};

RadialField apply_fraclap_radial(const RadialField& u, double s, const RadialTransformPlan& plan);
double hs_seminorm(const RadialField& u, double s, const RadialTransformPlan& plan);

// Forward and inverse radial Fourier transforms restricted to the physical nodes:
// forward returns u^ at grid.rho, inverse maps values at grid.rho back to grid.r.
std::vector<double> hankel_forward(const RadialField& u, const RadialTransformPlan& plan);
std::vector<double> hankel_inverse(const std::vector<double>& uhat, double beta_hat,
                                   const RadialTransformPlan& plan);

// ||u||_p^p over R^n with the power-law tail correction when a hint is present.
double lp_norm_pow(const RadialField& u, const RadialGrid& g, double p);
double lp_norm(const RadialField& u, const RadialGrid& g, double p);

struct SupNorm {
    double value = 0.0;
    int index = 0;
    double location = 0.0;
};
SupNorm sup_norm(const RadialField& u, const RadialGrid& g);

// Periodic lattice operator with symbol (2 pi |k|)^{2s}.
class BoxOperator {
public:
    BoxOperator(const BoxGrid& box, double s);
    ~BoxOperator();
    BoxOperator(const BoxOperator&) = delete;
    BoxOperator& operator=(const BoxOperator&) = delete;

    const BoxGrid& box() const { return box_; }
    const std::vector<double>& symbol() const { return sym_; }  // r2c layout
    std::vector<double> apply(const std::vector<double>& u) const;
    double seminorm(const std::vector<double>& u) const;  // int |(-Delta)^{s/2} u|^2
    std::vector<double> precondition(const std::vector<double>& g, double shift) const;

private:
    BoxGrid box_;
    int nc_ = 0;  // complex length of the r2c output
    std::vector<double> sym_;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) const;
    void backward(const std::vector<std::complex<double>>& in, std::vector<double>& out) const;
};

BoxField apply_fraclap_box(const BoxField& u, const BoxGrid& box, double s);

// (-Delta)^s u(r) for radial u from the singular integral, second-difference form.
struct OracleOptions {
    int theta_nodes = 48;
    double rho_max_factor = 1e6;  // outer cutoff in units of max(r, 1)
    double tol = 1e-9;
};
double singular_integral_oracle(const std::function<double(double)>& u, int n, double s,
                                double r, const OracleOptions& opt = {});

// Binary cache of the Mellin/Hankel kernel tables of a plan.
struct TransformCacheKey {
    int n = 0;
    int N = 0;
    double r_max = 0.0;
    double r_min = 0.0;
    Mapping mapping = Mapping::log;
    double s = 0.0;
};

// Rows: (-Delta)^s Mellin multiplier and three Hankel multipliers, real and imaginary parts.
struct KernelTables {
    int rows = 0, cols = 0;
    std::vector<double> data;  // row-major
};

KernelTables kernel_tables(const RadialTransformPlan& plan, double s);
std::string cache_file_name(const TransformCacheKey& key);
void write_kernel_cache(const std::string& path, const TransformCacheKey& key,
                        const KernelTables& t);
// Returns false if missing or the header does not match the key.
bool read_kernel_cache(const std::string& path, const TransformCacheKey& key, KernelTables& t);

// Directory searched by FracOp for cached tables; empty (the default) disables the cache.
void set_kernel_cache_dir(const std::string& dir);
struct KernelCacheStats {
    int hits = 0;
    int misses = 0;
};
KernelCacheStats kernel_cache_stats();
// Tables from the cache directory when set, computed (and stored) otherwise.
KernelTables cached_kernel_tables(const RadialTransformPlan& plan, double s);

}  // namespace fgs
