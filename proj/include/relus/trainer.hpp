#pragma once

#include <cstdint>
#include <string>

#include "relus/core.hpp"
#include "relus/rng.hpp"

namespace relus {

enum class Variant { vanilla, noisy, leaky };
enum class Schedule { cyclic, uniform };

struct TrainConfig {
    double eta = 0.01;
    double gamma = 100.0;
    /// Init radius: 0 -> zero init; finite > 0 -> spherical rows clamped to
    /// norm rho; infinity -> unclamped Gaussian rows with std init_std.
    double rho = 0.0;
    double init_std = 0.1;
    int patience = 5;  // stop after n*patience consecutive zero updates
    Schedule schedule = Schedule::cyclic;
    int max_passes = 5000;
    std::uint64_t seed = 0;
    Variant variant = Variant::noisy;
    double alpha = 0.1;  // leaky factor
    bool audit = false;
    double convergence_tol = 1e-10;

    void validate() const;
};

struct TrainReport {
    bool converged = false;
    Matrix final_weights;
    Vec v;
    long tau_k = 0;            // non-zero updates
    long total_iterations = 0;
    std::vector<std::size_t> picked_indices;  // sample index per non-zero update
    std::vector<std::size_t> complement_set;  // indices never picked by a non-zero update
    std::vector<double> phi_trace;            // audit only; length tau_k + 1
    std::vector<double> psi_sq_trace;
    double final_loss = 0.0;
    double final_error = 0.0;
    double w_max = 0.0;          // max row norm over all iterates
    double rho_effective = 0.0;  // max row norm of the initialization
    double eta = 0.0;
    double gamma = 0.0;
};

/// First-layer initialization per the configured radius rule.
Matrix init_weights(std::size_t k, std::size_t d, double rho, double init_std, Rng& rng);

/// Per-neuron activation noise: eps_j ~ N(0, gamma^2) when y*v_j >= 0, else 0.
Vec noise_mask(const Vec& v, int y, double gamma, Rng& rng);

/// One noise-injected update; returns whether the weights changed.
bool noisy_step(Network& net, const Sample& s, double eta, double gamma, Rng& rng);

/// Plain SGD update W <- W - eta * subgradient.
bool vanilla_step(Network& net, const Sample& s, double eta);

/// Hinge SGD step on the leaky network (derivative alpha on the negative side).
bool leaky_step(Network& net, const Sample& s, double eta, double alpha);

/// Global optimum built from the witness: row j = sgn(v_j)/v_min * omega.
Matrix optimum_from_witness(const Vec& v, const Vec& omega);

TrainReport run(const Dataset& data, Network net, const TrainConfig& cfg);

/// Replays a report's proof potentials: every non-zero update must gain
/// phi by at least eta and grow psi^2 by at most eta^2||v||^2 + 2*eta, and
/// tau_k must not exceed the worst-case update cap for the dataset's witness.
std::vector<std::string> audit_step_invariants(const TrainReport& report, const Dataset& data,
                                               const TrainConfig& cfg);

}  // namespace relus
