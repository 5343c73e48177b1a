#pragma once

#include <complex>
#include <functional>

#include "fgs/core_model.hpp"

namespace fgs {

double gamma_ln(double x);

// log Gamma on the complex plane (Lanczos, g = 7). Poles give +inf real part.
std::complex<double> gamma_ln(std::complex<double> z);

double coeff_D(int n, double s);

// Closed form as printed: 2^{2s} pi^s Gamma((n+2s)/2) / Gamma((n-2s)/2).
double sobolev_S(int n, double s);

// Best constant of  S ||u||_{2*}^2 <= ||(-Delta)^{s/2} u||^2 ; printed form
// times (Gamma(n/2)/Gamma(n))^{2s/n}.
double sobolev_S_sharp(int n, double s);

// Scale for which Q_s solves (-Delta)^s Q = Q^{2*_s - 1}.
double lambda_scale(int n, double s);

// Printed variant with exponent 1/2; equals lambda_scale at s = 1 only.
double lambda_scale_printed(int n, double s);

double kappa_ext(double s);

struct BubbleSpec {
    int n = 4;
    double s = 0.8;
    double lambda_s = 1.0;
};

BubbleSpec make_bubble(int n, double s);
BubbleSpec make_bubble(int n, double s, double scale);  // Q_s(r / scale)
double bubble_eval(const BubbleSpec& b, double r);
RadialField bubble_field(const BubbleSpec& b, const RadialGrid& g);

// n Gamma(n/2 - 2 s0) Gamma(n) / (Gamma(n - 2 s0) Gamma(n/2)).
double blowup_A(int n, double s0);

// n int Q^2 / int Q^p by double-exponential quadrature.
double blowup_A_quadrature(int n, double s0);

// int_0^inf f by exp-sinh quadrature; f may decay algebraically.
double integrate_half_line(const std::function<double(double)>& f, double rel_tol = 1e-13);

}  // namespace fgs
