#include "relus/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relus {

namespace {

struct VStats {
    double v_min;
    double v_sq;
    int pos;
    int neg;
};

VStats v_stats(const Vec& v) {
    if (v.empty()) throw std::invalid_argument("bounds: empty v");
    VStats s{std::numeric_limits<double>::infinity(), 0.0, 0, 0};
    for (double vj : v) {
        if (vj == 0.0) throw std::invalid_argument("bounds: v entries must be non-zero");
        s.v_min = std::min(s.v_min, std::abs(vj));
        s.v_sq += vj * vj;
        if (vj > 0.0) ++s.pos; else ++s.neg;
    }
    return s;
}

void require_mixed_signs(const VStats& s) {
    if (s.pos == 0 || s.neg == 0)
        throw std::invalid_argument("bounds: v needs entries of both signs");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double theorem1_Tk(const BoundInputs& in) {
    if (!(in.eta > 0.0)) throw std::invalid_argument("theorem1_Tk: eta > 0 required");
    const VStats s = v_stats(in.v);
    require_mixed_signs(s);
    const double w = in.omega_star_norm;
    const double a = in.eta * s.v_sq + 2.0;
    const double bracket = a * w * w + 2.0 * in.rho * s.v_min * s.v_sq +
                           std::sqrt(2.0 * in.rho * s.v_min * w * a) * w;
    return static_cast<double>(in.k) / (in.eta * s.v_min * s.v_min) * bracket;
}

double theorem1_Tk0(const BoundInputs& in) {
    if (!(in.eta > 0.0)) throw std::invalid_argument("theorem1_Tk0: eta > 0 required");
    const VStats s = v_stats(in.v);
    require_mixed_signs(s);
    const double w = in.omega_star_norm;
    return static_cast<double>(in.k) / (in.eta * s.v_min * s.v_min) *
           (in.eta * s.v_sq + 2.0) * w * w;
}

double leaky_bound(const BoundInputs& in) {
    if (in.alpha == 0.0) return std::numeric_limits<double>::infinity();
    if (!(in.alpha > 0.0 && in.alpha <= 1.0))
        throw std::invalid_argument("leaky_bound: alpha must lie in (0,1]");
    if (!(in.eta > 0.0)) throw std::invalid_argument("leaky_bound: eta > 0 required");
    const VStats s = v_stats(in.v);
    const double w = in.omega_star_norm;
    return w * w / (in.alpha * in.alpha) * (1.0 + 1.0 / (in.eta * s.v_sq));
}

double theorem2_lower(const BoundInputs& in) {
    if (!(in.eta > 0.0)) throw std::invalid_argument("theorem2_lower: eta > 0 required");
    const VStats s = v_stats(in.v);
    return in.omega_star_norm * in.omega_star_norm / (in.eta * s.v_sq);
}

double prop1_confidence(const BoundInputs& in) {
    if (!(in.gamma > 0.0)) throw std::invalid_argument("prop1_confidence: gamma > 0 required");
    if (!(in.w_max > 0.0)) throw std::invalid_argument("prop1_confidence: w_max > 0 required");
    if (in.patience < 1) throw std::invalid_argument("prop1_confidence: patience >= 1 required");
    const VStats s = v_stats(in.v);
    require_mixed_signs(s);
    const double exponent = static_cast<double>(in.patience) * std::min(s.pos, s.neg);
    return 1.0 - std::pow(normal_cdf(in.w_max / in.gamma), exponent);
}

double theorem3_compression(const BoundInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0))
        throw std::invalid_argument("theorem3_compression: delta in (0,1) required");
    if (in.tau_k < 0 || in.complement_risk < 0.0 || in.complement_risk > 1.0)
        throw std::invalid_argument("theorem3_compression: bad tau_k or complement risk");
    if (static_cast<long>(in.n) < 2 * in.tau_k)
        throw std::invalid_argument("theorem3_compression: precondition n >= 2 tau_k violated");
    const double n = static_cast<double>(in.n);
    const double tau = static_cast<double>(in.tau_k);
    const double log_term = std::log(n / in.delta);
    const double r = in.complement_risk;
    return r + std::sqrt(r * 4.0 * tau * log_term / n) + 8.0 * tau * log_term / n;
}

double corollary1_bound(const BoundInputs& in) {
    if (!(in.delta > 0.0 && in.delta < 1.0))
        throw std::invalid_argument("corollary1_bound: delta in (0,1) required");
    if (in.n < 1) throw std::invalid_argument("corollary1_bound: n >= 1 required");
    const double n = static_cast<double>(in.n);
    return 8.0 * theorem1_Tk(in) * std::log(n / in.delta) / n;
}

bool is_vacuous_risk(double bound) { return !(bound < 1.0); }

}  // namespace relus
