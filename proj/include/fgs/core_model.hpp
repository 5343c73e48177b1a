#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (n, p, s) and the indices derived from them.
struct ProblemParams {
    int n = 4;
    double p = 3.0;
    double s = 0.8;
    double s0 = 0.0;       // (p-2) n / (2p)
    double alpha_s = 0.0;  // 2s / (p-2)
    bool subcritical = false;  // s > s0: ground states exist

    double two_star_s() const;  // 2n/(n-2s), throws for s >= n/2
};

ProblemParams make_params(int n, double p, double s);

enum class Mapping { log, algebraic };

Mapping parse_mapping(const std::string& name);
std::string mapping_name(Mapping m);

// Radial nodes r_i with weights for  int_0^inf f(r) r^{n-1} dr.
// Frequency nodes rho_j = 1/r_{N-1-j} carry the same kind of weights.
struct RadialGrid {
    int n = 0;
    int N = 0;
    double r_min = 0.0;
    double r_max = 0.0;
    Mapping mapping = Mapping::log;
    double h = 0.0;  // log step (log mapping only)
    double tail_tol = 0.0;
    std::vector<double> r, w;
    std::vector<double> rho, wrho;

    double area() const;  // |S^{n-1}|
    double integrate_radial(const std::vector<double>& f) const;  // sum w_i f_i
    double integrate(const std::vector<double>& f) const;         // over R^n
};

RadialGrid build_radial_grid(int n, int N, double r_max, Mapping mapping = Mapping::log,
                             double r_min = 1e-4, double tail_tol = 1e-6);

// Power-law tail beyond r_max:  int_{r_max}^inf (c (r/r_max)^{-beta})^k r^{n-1} dr.
double power_tail(int n, double r_max, double c, double beta, double k);

struct RadialField {
    std::vector<double> u;
    std::optional<double> tail;  // decay exponent beyond r_max
};

struct BoxGrid {
    int n = 2;
    double L = 8.0;  // periodic box [-L, L)^n
    int M = 128;
    double dx = 0.0;
    std::vector<double> x;  // 1D coordinates
    std::size_t size() const;
    double cell_volume() const;
};

BoxGrid make_box_grid(int n, double L, int M);

// Row-major lattice values, index ix*M + iy for n = 2.
struct BoxField {
    std::vector<double> u;
};

}  // namespace fgs
