#pragma once

#include <cstddef>

#include "relus/core.hpp"

namespace relus {

struct BoundInputs {
    std::size_t k = 0;
    std::size_t d = 0;
    std::size_t n = 0;
    double eta = 0.0;
    Vec v;
    double rho = 0.0;
    double omega_star_norm = 0.0;  // ||omega*||_2
    double alpha = 0.0;
    double gamma = 0.0;
    double w_max = 0.0;
    int patience = 0;
    double delta = 0.0;  // confidence parameter in (0,1)
    long tau_k = 0;
    double complement_risk = 0.0;
};

/// Standard normal CDF, accurate to machine precision via erfc.
double normal_cdf(double z);

/// Worst-case non-zero-update cap for a radius-rho initialization.
double theorem1_Tk(const BoundInputs& in);

/// Zero-init cap: (k / (eta v_min^2)) (eta ||v||^2 + 2) ||omega*||^2.
double theorem1_Tk0(const BoundInputs& in);

/// Leaky-ReLU comparator: (||omega*||^2 / alpha^2)(1 + 1/(eta ||v||^2)).
/// Returns +infinity as alpha -> 0.
double leaky_bound(const BoundInputs& in);

/// Adversarial lower bound ||omega*||^2 / (eta ||v||^2).
double theorem2_lower(const BoundInputs& in);

/// Stop-rule confidence 1 - Phi(w_max/gamma)^(p * min{|N_v^+|, |N_v^-|}).
double prop1_confidence(const BoundInputs& in);

/// Compression risk bound (natural log); requires n >= 2 tau_k.
double theorem3_compression(const BoundInputs& in);

/// A-priori zero-risk bound 8 T_k log(n/delta) / n with T_k from theorem1_Tk.
double corollary1_bound(const BoundInputs& in);

/// A risk bound above 1 carries no information; flagged, never clamped.
bool is_vacuous_risk(double bound);

}  // namespace relus
