#include "fgs/potentials.hpp"

#include <cmath>
#include <sstream>

namespace fgs {

Potential constant_potential(double c) {
    if (!(c > 0.0)) throw ConfigError("constant potential must be positive");
    Potential V;
    V.kind = PotentialKind::constant;
    V.V_inf = c;
    return V;
}

Potential well_potential(double V_inf, double B, double m, double w, std::vector<double> x0) {
    if (!(w > 0.0)) throw ConfigError("well width must be positive");
    if (!(m > 0.0)) throw ConfigError("well power must be positive");
    Potential V;
    V.kind = PotentialKind::well;
    V.V_inf = V_inf;
    V.B = B;
    V.m = m;
    V.w = w;
    V.x0 = std::move(x0);
    return V;
}

namespace {

double offset(const Potential& V, const std::vector<double>& x, std::size_t d) {
    return x[d] - (d < V.x0.size() ? V.x0[d] : 0.0);
}

double dist(const Potential& V, const std::vector<double>& x) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) r2 += offset(V, x, d) * offset(V, x, d);
    return std::sqrt(r2);
}

// dV/dr for the well.
double radial_derivative(const Potential& V, double r) {
    if (r == 0.0) return 0.0;
    double z = std::pow(r / V.w, V.m);
    return V.B * V.m * z / ((1.0 + z) * (1.0 + z)) / r;
}

}  // namespace

double eval_V_radial(const Potential& V, double r) {
    if (V.kind == PotentialKind::constant) return V.V_inf;
    double z = std::pow(r / V.w, V.m);
    return V.V_inf - V.B / (1.0 + z);
}

double eval_x_dot_gradV_radial(const Potential& V, double r) {
    if (V.kind == PotentialKind::constant) return 0.0;
    double z = std::pow(r / V.w, V.m);
    return V.B * V.m * z / ((1.0 + z) * (1.0 + z));
}

double eval_V(const Potential& V, const std::vector<double>& x) {
    return eval_V_radial(V, dist(V, x));
}

std::vector<double> eval_gradV(const Potential& V, const std::vector<double>& x) {
    std::vector<double> g(x.size(), 0.0);
    if (V.kind == PotentialKind::constant) return g;
    double r = dist(V, x);
    double dr = radial_derivative(V, r) / (r == 0.0 ? 1.0 : r);
    for (std::size_t d = 0; d < x.size(); ++d) g[d] = dr * offset(V, x, d);
    return g;
}

double eval_x_dot_gradV(const Potential& V, const std::vector<double>& x) {
    std::vector<double> g = eval_gradV(V, x);
    double acc = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) acc += x[d] * g[d];
    return acc;
}

std::vector<double> sample_V(const Potential& V, const RadialGrid& g) {
    for (double c : V.x0)
        if (c != 0.0) throw ConfigError("radial mode pins the well center to the origin");
    std::vector<double> v(g.N);
    for (int i = 0; i < g.N; ++i) v[i] = eval_V_radial(V, g.r[i]);
    return v;
}

std::vector<double> sample_x_dot_gradV(const Potential& V, const RadialGrid& g) {
    std::vector<double> v(g.N);
    for (int i = 0; i < g.N; ++i) v[i] = eval_x_dot_gradV_radial(V, g.r[i]);
    return v;
}

std::vector<double> sample_V(const Potential& V, const BoxGrid& b) {
    auto image = [&](double x, int d) {
        double c = d < int(V.x0.size()) ? V.x0[d] : 0.0;
        double dx = x - c;
        double period = 2.0 * b.L;
        return dx - period * std::round(dx / period);
    };
    std::vector<double> v(b.size());
    const int M = b.M;
    for (std::size_t k = 0; k < v.size(); ++k) {
        double r2 = 0.0;
        if (b.n == 1) {
            double e = image(b.x[k], 0);
            r2 = e * e;
        } else {
            double ex = image(b.x[k / M], 0), ey = image(b.x[k % M], 1);
            r2 = ex * ex + ey * ey;
        }
        v[k] = eval_V_radial(V, std::sqrt(r2));
    }
    return v;
}

bool AssumptionReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

AssumptionReport validate_assumptions(const Potential& V, const ProblemParams& params) {
    AssumptionReport rep;
    std::ostringstream os;
    os.precision(10);
    // V1: 0 < V0 <= V < V_inf (constant potentials: V0 = V_inf > 0)
    {
        AssumptionCheck c{"V1", false, ""};
        double V0 = V.V0();
        if (V.kind == PotentialKind::constant) {
            c.pass = V0 > 0.0;
            os << "V0 = " << V0;
        } else {
            c.pass = V0 > 0.0 && V.B > 0.0;
            os << "V0 = " << V0 << ", B = " << V.B;
        }
        c.detail = os.str();
        rep.checks.push_back(c);
        os.str("");
    }
    // V2: sup |x . grad V| = B m sup z/(1+z)^2 = B m / 4
    {
        AssumptionCheck c{"V2", true, ""};
        double sup = V.kind == PotentialKind::constant ? 0.0 : std::abs(V.B) * V.m / 4.0;
        c.pass = std::isfinite(sup);
        os << "sup |x.gradV| = " << sup;
        c.detail = os.str();
        rep.checks.push_back(c);
        os.str("");
    }
    // V3: 1 < m < n - 4 s0 and A > 0
    {
        AssumptionCheck c{"V3", false, ""};
        double hi = params.n - 4.0 * params.s0;
        if (V.kind == PotentialKind::constant) {
            c.pass = true;
            os << "not applicable to a constant potential";
        } else {
            c.pass = V.m > 1.0 && V.m < hi && V.A() > 0.0;
            os << "m = " << V.m << ", range (1, " << hi << "), A = " << V.A();
        }
        c.detail = os.str();
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace fgs
