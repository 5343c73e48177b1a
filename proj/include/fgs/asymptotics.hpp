#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgs/solver.hpp"

namespace fgs {

// u(r / scale) at the grid nodes; monotone cubic in log r, inner r^2 fit, power tail.
std::vector<double> resample(const std::vector<double>& u, double beta,
                             const RadialTransformPlan& plan, double scale,
                             bool* out_of_range = nullptr);

// v_s(y) = mu^alpha u(mu y) on the solver grid.
RadialField rescale_profile(const GroundState& gs, const RadialTransformPlan& plan,
                            bool* out_of_range = nullptr);

struct BubbleDistance {
    double lp = 0.0;       // ||v - Q_{s0}||_p
    double lp_rel = 0.0;   // divided by ||Q_{s0}||_p
    double sup = 0.0;      // sup |v - Q_{s0}|
};
BubbleDistance bubble_distance(const RadialField& v, const ProblemParams& params,
                               const RadialGrid& g);

// (s - s0) mu^{-2s} / (A inf V)
double blowup_ratio(const GroundState& gs, const Potential& V);
// (s - s0) ||u||_inf^{p-2} / (A inf V)
double blowup_ratio_sup_form(const GroundState& gs, const Potential& V);
double eta_s(const ProblemParams& params, const Potential& V);

// Least-squares slope of log v against log r over the nodes in [r_a, r_b].
double decay_exponent_fit(const RadialField& v, const RadialGrid& g, double r_a, double r_b);

struct ConcentrationReport {
    double V_at_peak = 0.0;
    double inf_V = 0.0;
    double gap = 0.0;
    double eps = 0.0;
    double mass_fraction = 0.0;        // ball mass / S(n,s0)^{p/(p-2)}
    double mass_fraction_total = 0.0;  // ball mass / int u^p
};
// Radial mode: ball radius defaults to 5 lambda_{s0} mu_s.
ConcentrationReport concentration_report(const GroundState& gs, const Potential& V,
                                         const RadialGrid& g, double eps = 0.0);
// Box mode: ball radius defaults to 5 lattice cells.
ConcentrationReport concentration_report(const BoxGroundState& gs, const Potential& V,
                                         const BoxGrid& box, double eps = 0.0);

double lp_distance(const std::vector<double>& a, const std::vector<double>& b, const RadialGrid& g,
                   double p);

struct SweepRow {
    double s = 0.0;
    double S_V = 0.0;
    double mu_s = 0.0;
    double x_s = 0.0;
    double eta_s = 0.0;
    double bubble_lp_dist = 0.0;
    double bubble_lp_rel = 0.0;
    double bubble_sup_dist = 0.0;
    double blowup_ratio = 0.0;
    double blowup_ratio_corrected = 0.0;  // times n / s0, tends to 1
    double decay_exponent_fit = 0.0;
    double decay_target = 0.0;  // -(n - 2s)
    double V_at_peak = 0.0;
    double gap = 0.0;
    double mass_fraction = 0.0;
    double S_rel_to_S0 = 0.0;  // S_V / S(n, s0) - 1
    double pohozaev_residual = 0.0;
    double pohozaev_residual_printed = 0.0;
    double el_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool valid = false;
    std::string stop_reason;
};

std::vector<std::string> sweep_columns();
std::vector<std::string> sweep_row_values(const SweepRow& r);

struct TrendCheck {
    std::string name;
    bool pass = false;
    int violations = 0;
};

// Non-increasing along the sequence, one violation of at most 10% allowed.
TrendCheck trend_non_increasing(const std::string& name, const std::vector<double>& x);

struct SweepConfig {
    MinimizeConfig solver;
    bool warm_start = true;
    double decay_window_lo = 5.0;   // in units of lambda_{s0}
    double decay_window_hi = 20.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<GroundState> states;
    std::vector<TrendCheck> trends;
    bool all_converged = true;
};

SweepRow make_sweep_row(const GroundState& gs, const Potential& V, const RadialTransformPlan& plan,
                        const SweepConfig& cfg);

// s values are sorted into descending order.
SweepResult sweep(int n, double p, std::vector<double> s_list, const Potential& V,
                  const RadialTransformPlan& plan, const SweepConfig& cfg);

struct BoxSweepRow {
    double s = 0.0;
    double S_V = 0.0;
    double mu_s = 0.0;
    std::vector<double> x_s;
    double V_at_peak = 0.0;
    double gap = 0.0;
    double peak_dist_cells = 0.0;
    double mass_fraction = 0.0;
    double mass_fraction_total = 0.0;
    double el_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct BoxSweepResult {
    std::vector<BoxSweepRow> rows;
    std::vector<TrendCheck> trends;
    bool all_converged = true;
};

BoxSweepResult box_sweep(int n, double p, std::vector<double> s_list, const Potential& V,
                         const BoxGrid& box, const MinimizeConfig& cfg);

struct ProbeResult {
    std::vector<TracePoint> trace;
    double S0 = 0.0;  // sharp S(n, s0)
    double min_energy = 0.0;
    double final_energy = 0.0;
    double sup_initial = 0.0;
    double sup_final = 0.0;  // of the ||.||_p-normalized iterate
    int sup_decreases = 0;
    bool collapsed = false;
    std::string stop_reason;
};

ProbeResult subcritical_probe(const ProblemParams& params, const Potential& V,
                              const RadialTransformPlan& plan, const MinimizeConfig& cfg);

struct UniquenessResult {
    int K = 0;
    double max_sup_dist = 0.0;
    double max_S_dist = 0.0;
    bool all_converged = true;
    std::vector<double> S_values;
    std::vector<double> residuals;
};

UniquenessResult uniqueness_probe(const ProblemParams& params, const Potential& V,
                                  const RadialTransformPlan& plan, const MinimizeConfig& cfg, int K,
                                  std::uint64_t seed, double amplitude = 0.2);

}  // namespace fgs
