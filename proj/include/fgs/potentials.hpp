#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fgs/core_model.hpp"

namespace fgs {

enum class PotentialKind { constant, well };

// constant: V = V_inf.  well: V = V_inf - B / (1 + |x - x0|^m / w^m).
struct Potential {
    PotentialKind kind = PotentialKind::constant;
    double V_inf = 1.0;
    double B = 0.0;
    double m = 2.0;
    double w = 1.0;
    std::vector<double> x0;  // empty means the origin

    double V0() const { return kind == PotentialKind::constant ? V_inf : V_inf - B; }
    double A() const { return kind == PotentialKind::constant ? 0.0 : B / std::pow(w, m); }
};

Potential constant_potential(double c);
Potential well_potential(double V_inf, double B, double m, double w, std::vector<double> x0 = {});

double eval_V(const Potential& V, const std::vector<double>& x);
std::vector<double> eval_gradV(const Potential& V, const std::vector<double>& x);
double eval_x_dot_gradV(const Potential& V, const std::vector<double>& x);

// Radial profiles about x0 (x0 must be the origin).
double eval_V_radial(const Potential& V, double r);
double eval_x_dot_gradV_radial(const Potential& V, double r);
std::vector<double> sample_V(const Potential& V, const RadialGrid& g);
std::vector<double> sample_x_dot_gradV(const Potential& V, const RadialGrid& g);

// Periodic lattice samples, distances to x0 taken as minimum images.
std::vector<double> sample_V(const Potential& V, const BoxGrid& b);

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass() const;
};

AssumptionReport validate_assumptions(const Potential& V, const ProblemParams& params);

}  // namespace fgs
