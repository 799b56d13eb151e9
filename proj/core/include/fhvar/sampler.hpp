#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "fhvar/distributions.hpp"
#include "fhvar/model.hpp"
#include "fhvar/random.hpp"
#include "fhvar/state.hpp"

namespace fhvar {

struct NormalParams {
    double mean = 0.0;
    double var = 1.0;
};

struct SamplerConfig {
    std::size_t burn_in = 1000;
    std::size_t n_draws = 5000;
    std::size_t thin = 1;
    double mh_step_c = 0.04;  ///< random-walk proposal variance c
    std::uint64_t seed = 1;
};

struct ChainDiagnostics {
    std::optional<double> mh_accept_rate;  ///< present only for Stk2
    std::size_t n_kept = 0;
};

struct ChainResult {
    PosteriorDraws draws;
    ChainDiagnostics diagnostics;
};

struct MhResult {
    Eigen::VectorXd eta;
    bool accepted = false;
};

// Full conditional distributions of the Gibbs sweep, exposed so the
// sampling kernels can be checked against their closed forms.

NormalParams theta_conditional(const ParameterState& state, const Dataset& data, Eigen::Index i);

/// Variant-dependent: Stk1 uses IG(n_i/2 + a_i, (x_i - theta_i)^2/2 +
/// (n_i - 1) s2_i / 2 + b_i gamma); Stk2 replaces b_i by
/// b_i exp(w_i' eta); Yc drops the prior terms and uses IG(n_i/2, ...).
InverseGammaParams sigma2_conditional(const ParameterState& state, const Dataset& data,
                                      const ModelSpec& spec, Eigen::Index i);

MvnParams beta_conditional(const ParameterState& state, const Dataset& data);

/// IG(m/2 - 1, ||theta - Z beta||^2 / 2). Throws DegenerateStateError when
/// the residual sum of squares is exactly zero.
InverseGammaParams tau2_conditional(const ParameterState& state, const Dataset& data);

GammaParams gamma_conditional(const ParameterState& state, const Dataset& data,
                              const ModelSpec& spec);

/// log p(eta0, eta*) of the random-walk MH step. Exactly antisymmetric in
/// its last two arguments.
double mh_log_acceptance_ratio(const Dataset& data, const HyperParams& hyper, double gamma,
                               const Eigen::VectorXd& sigma2, const Eigen::VectorXd& eta0,
                               const Eigen::VectorXd& eta_star);

// One-block updates. Each returns the new value and leaves the input
// state untouched.

Eigen::VectorXd update_theta(const ParameterState& state, const Dataset& data, RandomSource& rng);
Eigen::VectorXd update_sigma2(const ParameterState& state, const Dataset& data,
                              const ModelSpec& spec, RandomSource& rng);
Eigen::VectorXd update_beta(const ParameterState& state, const Dataset& data, RandomSource& rng);
double update_tau2(const ParameterState& state, const Dataset& data, RandomSource& rng);
double update_gamma(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                    RandomSource& rng);
MhResult mh_update_eta(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                       double step_c, RandomSource& rng);

/// Deterministic method-of-moments start: theta = x, sigma2 = s2, beta the
/// least-squares fit of x on Z, tau2 the residual sample variance (floored
/// at 1e-8), gamma the prior-mean inversion mean_i sigma2_i (a_i - 1)/b_i
/// (floored at 1e-8), eta = 0. Requires the propriety conditions to hold.
ParameterState init_state(const Dataset& data, const ModelSpec& spec, RandomSource& rng);

/// Runs burn_in + n_draws * thin sweeps in the fixed order theta, sigma2,
/// beta, tau2, gamma, then eta (Stk2 only), retaining every thin-th
/// post-burn-in state. Identical seeds give identical draws.
ChainResult run_chain(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config);

}  // namespace fhvar
