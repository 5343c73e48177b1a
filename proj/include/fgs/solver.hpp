#pragma once

#include <string>
#include <vector>

#include "fgs/core_model.hpp"
#include "fgs/frac_op.hpp"
#include "fgs/potentials.hpp"

namespace fgs {

struct MinimizeConfig {
    int max_iter = 20000;
    double tol_el = 1e-6;
    double tol_stall = 1e-15;  // relative energy drop over the stall window
    int stall_window = 100;
    double shift = 0.0;  // preconditioner shift; <= 0 selects V0
    double step0 = 1.0;
    double step_min = 1e-14;
    double energy_slack = 1e-14;  // rounding allowance in the descent test
    bool modulus_each_step = false;
    double collapse_factor = 20.0;  // half-height radius below this many r_min
    bool stop_on_collapse = true;
    std::string initial = "bubble";  // bubble | plain
};

struct TracePoint {
    int iter = 0;
    double energy = 0.0;
    double residual = 0.0;
    double step = 0.0;
    double sup = 0.0;
    double half_radius = 0.0;
};

struct MinimizeResult {
    std::vector<double> w;  // ||w||_p = 1
    double S_V = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool collapsed = false;
    std::string stop_reason;
    std::vector<TracePoint> trace;
};

double eval_rayleigh(const RadialField& u, double s, const Potential& V, double p,
                     const RadialTransformPlan& plan);
double eval_rayleigh(const BoxField& u, double s, const Potential& V, double p, const BoxGrid& box);

// Starting profile: bubble at the scale predicted by the blow-up law near s0, plain Q_s otherwise.
std::vector<double> initial_guess(const ProblemParams& params, const Potential& V,
                                  const RadialGrid& g, const std::string& kind = "bubble");
std::vector<double> initial_guess(const ProblemParams& params, const BoxGrid& box);

MinimizeResult minimize_rayleigh(const ProblemParams& params, const Potential& V,
                                 const RadialTransformPlan& plan, const MinimizeConfig& cfg,
                                 const std::vector<double>& w0);
MinimizeResult minimize_rayleigh(const ProblemParams& params, const Potential& V,
                                 const RadialTransformPlan& plan, const MinimizeConfig& cfg);
MinimizeResult minimize_box(const ProblemParams& params, const Potential& V, const BoxGrid& box,
                            const MinimizeConfig& cfg, const std::vector<double>& w0);

struct GroundState {
    ProblemParams params;
    RadialField u;
    double S_V = 0.0;
    double lambda = 0.0;  // <(-Delta)^s w + V w, w> / int w^p, pointwise route
    double mu_s = 0.0;
    double x_s = 0.0;
    double sup = 0.0;
    double residual_el = 0.0;
    double residual_pohozaev = 0.0;
    double residual_pohozaev_printed = 0.0;  // with the (s - s0)/n prefactor
    double kinetic = 0.0;    // int |(-Delta)^{s/2} u|^2
    double potential = 0.0;  // int V u^2
    double lp_pow = 0.0;     // int u^p
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

GroundState to_ground_state(const MinimizeResult& res, const ProblemParams& params,
                            const Potential& V, const RadialTransformPlan& plan);

// ||(-Delta)^s u + V u - u^{p-1}||_2 / ||u^{p-1}||_2
double el_residual(const RadialField& u, double s, const Potential& V, double p,
                   const RadialTransformPlan& plan);
// |(s-s0)/s int u^p - int (V + x.gradV/(2s)) u^2| / |int (V + x.gradV/(2s)) u^2|
double pohozaev_residual(const RadialField& u, const ProblemParams& params, const Potential& V,
                         const RadialGrid& g);
double pohozaev_residual_printed(const RadialField& u, const ProblemParams& params,
                                 const Potential& V, const RadialGrid& g);

struct BoxGroundState {
    ProblemParams params;
    BoxField u;
    double S_V = 0.0;
    double mu_s = 0.0;
    double sup = 0.0;
    int peak_index = 0;
    std::vector<double> x_s;
    double residual_el = 0.0;
    double lp_pow = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
};

BoxGroundState to_ground_state(const MinimizeResult& res, const ProblemParams& params,
                               const Potential& V, const BoxGrid& box);

}  // namespace fgs
