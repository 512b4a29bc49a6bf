#include "relus/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relus/bounds.hpp"

namespace relus {

void TrainConfig::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("TrainConfig: eta > 0 required");
    if (!(gamma >= 0.0)) throw std::invalid_argument("TrainConfig: gamma >= 0 required");
    if (!(rho >= 0.0)) throw std::invalid_argument("TrainConfig: rho >= 0 required");
    if (patience < 1) throw std::invalid_argument("TrainConfig: patience >= 1 required");
    if (max_passes < 1) throw std::invalid_argument("TrainConfig: max_passes >= 1 required");
    if (variant == Variant::leaky && !(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("TrainConfig: leaky requires alpha in (0,1)");
}

Matrix init_weights(std::size_t k, std::size_t d, double rho, double init_std, Rng& rng) {
    Matrix w(k, d);
    if (rho == 0.0) return w;
    if (std::isinf(rho)) {
        for (double& c : w.data) c = rng.gaussian(0.0, init_std);
        return w;
    }
    for (std::size_t j = 0; j < k; ++j) {
        double* row = w.row(j);
        for (std::size_t i = 0; i < d; ++i) row[i] = rng.gaussian();
        const double nrm = row_norm2(w, j);
        if (nrm > rho && nrm > 0.0) {
            const double scale = rho / nrm;
            for (std::size_t i = 0; i < d; ++i) row[i] *= scale;
        }
    }
    return w;
}

Vec noise_mask(const Vec& v, int y, double gamma, Rng& rng) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("noise_mask: gamma >= 0 required");
    Vec eps(v.size(), 0.0);
    if (gamma == 0.0) return eps;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (y * v[j] >= 0.0) eps[j] = rng.gaussian(0.0, gamma);
    return eps;
}

bool noisy_step(Network& net, const Sample& s, double eta, double gamma, Rng& rng) {
    if (s.x.size() != net.d()) throw std::invalid_argument("noisy_step: dimension mismatch");
    const double margin = s.y * forward(net, s.x);
    if (margin >= 1.0) return false;
    const Vec eps = noise_mask(net.v(), s.y, gamma, rng);
    bool any_active = false;
    for (std::size_t j = 0; j < net.k(); ++j) {
        double* wj = net.weights().row(j);
        if (dot(wj, s.x.data(), s.x.size()) + eps[j] >= 0.0) {
            any_active = true;
            const double c = eta * s.y * net.v()[j];
            for (std::size_t i = 0; i < net.d(); ++i) wj[i] += c * s.x[i];
        }
    }
    return any_active;
}

bool vanilla_step(Network& net, const Sample& s, double eta) {
    if (s.x.size() != net.d()) throw std::invalid_argument("vanilla_step: dimension mismatch");
    const double margin = s.y * forward(net, s.x);
    if (margin >= 1.0) return false;
    bool any_active = false;
    for (std::size_t j = 0; j < net.k(); ++j) {
        double* wj = net.weights().row(j);
        if (dot(wj, s.x.data(), s.x.size()) >= 0.0) {
            any_active = true;
            const double c = eta * s.y * net.v()[j];
            for (std::size_t i = 0; i < net.d(); ++i) wj[i] += c * s.x[i];
        }
    }
    return any_active;
}

bool leaky_step(Network& net, const Sample& s, double eta, double alpha) {
    const double margin = s.y * leaky_forward(net, s.x, alpha);
    if (margin >= 1.0) return false;
    for (std::size_t j = 0; j < net.k(); ++j) {
        double* wj = net.weights().row(j);
        const double deriv = dot(wj, s.x.data(), s.x.size()) >= 0.0 ? 1.0 : alpha;
        const double c = eta * s.y * net.v()[j] * deriv;
        for (std::size_t i = 0; i < net.d(); ++i) wj[i] += c * s.x[i];
    }
    return true;  // the leaky derivative never vanishes
}

Matrix optimum_from_witness(const Vec& v, const Vec& omega) {
    double v_min = std::numeric_limits<double>::infinity();
    for (double vj : v) v_min = std::min(v_min, std::abs(vj));
    Matrix omega_mat(v.size(), omega.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double c = (v[j] >= 0.0 ? 1.0 : -1.0) / v_min;
        double* row = omega_mat.row(j);
        for (std::size_t i = 0; i < omega.size(); ++i) row[i] = c * omega[i];
    }
    return omega_mat;
}

namespace {

double variant_loss(const Network& net, const Dataset& data, const TrainConfig& cfg) {
    if (cfg.variant != Variant::leaky) return empirical_loss(net, data);
    double s = 0.0;
    for (const Sample& smp : data.samples)
        s += hinge(smp.y * leaky_forward(net, smp.x, cfg.alpha));
    return s / static_cast<double>(data.size());
}

double variant_error(const Network& net, const Dataset& data, const TrainConfig& cfg) {
    if (cfg.variant != Variant::leaky) return training_error(net, data);
    std::size_t wrong = 0;
    for (const Sample& smp : data.samples) {
        const int pred = leaky_forward(net, smp.x, cfg.alpha) >= 0.0 ? 1 : -1;
        if (pred != smp.y) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

// Whether a deterministic-variant step could still change the weights.
bool deterministic_would_update(const Network& net, const Sample& s, const TrainConfig& cfg) {
    if (cfg.variant == Variant::leaky)
        return s.y * leaky_forward(net, s.x, cfg.alpha) < 1.0;
    if (s.y * forward(net, s.x) >= 1.0) return false;
    for (std::size_t j = 0; j < net.k(); ++j)
        if (dot(net.weights().row(j), s.x.data(), s.x.size()) >= 0.0) return true;
    return false;
}

}  // namespace

TrainReport run(const Dataset& data, Network net, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("run: empty dataset");
    if (data.dim() != net.d()) throw std::invalid_argument("run: dimension mismatch");
    if (cfg.audit && !data.separator)
        throw std::invalid_argument("run: audit requires a dataset with a separator");

    TrainReport rep;
    rep.eta = cfg.eta;
    rep.gamma = cfg.gamma;
    rep.v = net.v();

    Matrix omega_mat;
    if (cfg.audit) {
        omega_mat = optimum_from_witness(net.v(), *data.separator);
        rep.phi_trace.push_back(frobenius_inner(net.weights(), omega_mat));
        rep.psi_sq_trace.push_back(frobenius_sq(net.weights()));
    }
    for (std::size_t j = 0; j < net.k(); ++j)
        rep.rho_effective = std::max(rep.rho_effective, row_norm2(net.weights(), j));
    rep.w_max = rep.rho_effective;

    Rng rng(cfg.seed);
    // max_passes caps *effective* data passes: the budget is counted in
    // non-zero updates, not raw iterations. Iterations where nothing moves
    // are free, up to a generous safety valve against pathological stalls.
    const long max_updates = static_cast<long>(cfg.max_passes) * static_cast<long>(n);
    const long iter_cap = 50 * max_updates;
    const long window = static_cast<long>(cfg.patience) * static_cast<long>(n);
    long zero_run = 0;
    bool dirty = true;  // weights changed since the last failed convergence check
    const bool deterministic = cfg.variant != Variant::noisy || cfg.gamma == 0.0;

    long iter = 0;
    while (rep.tau_k < max_updates && iter < iter_cap) {
        const std::size_t idx = cfg.schedule == Schedule::cyclic
                                    ? static_cast<std::size_t>(iter % static_cast<long>(n))
                                    : static_cast<std::size_t>(rng.next_u64() % n);
        const Sample& s = data.samples[idx];
        bool nonzero = false;
        switch (cfg.variant) {
            case Variant::vanilla: nonzero = vanilla_step(net, s, cfg.eta); break;
            case Variant::noisy: nonzero = noisy_step(net, s, cfg.eta, cfg.gamma, rng); break;
            case Variant::leaky: nonzero = leaky_step(net, s, cfg.eta, cfg.alpha); break;
        }
        ++iter;
        if (nonzero) {
            ++rep.tau_k;
            rep.picked_indices.push_back(idx);
            zero_run = 0;
            dirty = true;
            for (std::size_t j = 0; j < net.k(); ++j)
                rep.w_max = std::max(rep.w_max, row_norm2(net.weights(), j));
            if (cfg.audit) {
                rep.phi_trace.push_back(frobenius_inner(net.weights(), omega_mat));
                rep.psi_sq_trace.push_back(frobenius_sq(net.weights()));
            }
        } else {
            ++zero_run;
        }
        if (zero_run >= window && dirty) {
            // The probabilistic stop rule fired; confirm with a full pass.
            if (variant_loss(net, data, cfg) <= cfg.convergence_tol) {
                rep.converged = true;
                break;
            }
            dirty = false;
            if (deterministic) {
                // Zero updates with unchanged weights repeat forever; probe every
                // sample and bail out if none can still move.
                bool movable = false;
                for (const Sample& smp : data.samples)
                    if (deterministic_would_update(net, smp, cfg)) {
                        movable = true;
                        break;
                    }
                if (!movable) break;  // stuck at a sub-optimal critical point
            }
        }
    }

    rep.total_iterations = iter;
    rep.final_loss = variant_loss(net, data, cfg);
    rep.final_error = variant_error(net, data, cfg);

    std::vector<bool> picked(n, false);
    for (std::size_t idx : rep.picked_indices) picked[idx] = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!picked[i]) rep.complement_set.push_back(i);

    rep.final_weights = std::move(net.weights());
    return rep;
}

std::vector<std::string> audit_step_invariants(const TrainReport& report, const Dataset& data,
                                               const TrainConfig& cfg) {
    std::vector<std::string> violations;
    if (report.phi_trace.empty() || report.phi_trace.size() != report.psi_sq_trace.size()) {
        violations.push_back("missing or inconsistent phi/psi traces");
        return violations;
    }
    if (static_cast<long>(report.phi_trace.size()) != report.tau_k + 1) {
        violations.push_back("trace length does not match tau_k + 1");
        return violations;
    }
    const double v_sq = dot(report.v, report.v);
    const double phi_min = cfg.eta - 1e-9;
    const double psi_max = cfg.eta * cfg.eta * v_sq + 2.0 * cfg.eta + 1e-9;
    for (std::size_t t = 0; t + 1 < report.phi_trace.size(); ++t) {
        const double dphi = report.phi_trace[t + 1] - report.phi_trace[t];
        if (dphi < phi_min)
            violations.push_back("update " + std::to_string(t) + ": phi gain " +
                                 std::to_string(dphi) + " below eta");
        const double dpsi = report.psi_sq_trace[t + 1] - report.psi_sq_trace[t];
        if (dpsi > psi_max)
            violations.push_back("update " + std::to_string(t) + ": psi^2 growth " +
                                 std::to_string(dpsi) + " above eta^2||v||^2 + 2 eta");
    }
    if (data.separator) {
        BoundInputs in;
        in.k = report.v.size();
        in.eta = cfg.eta;
        in.v = report.v;
        in.rho = report.rho_effective;
        in.omega_star_norm = norm2(*data.separator);
        const double cap = theorem1_Tk(in);
        if (static_cast<double>(report.tau_k) > cap)
            violations.push_back("tau_k " + std::to_string(report.tau_k) +
                                 " exceeds worst-case cap " + std::to_string(cap));
    }
    return violations;
}

}  // namespace relus
