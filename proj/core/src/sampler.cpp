#include "fhvar/sampler.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "fhvar/errors.hpp"

namespace fhvar {

namespace {

void require_state_dims(const ParameterState& state, const Dataset& data) {
    if (state.theta.size() != data.m() || state.sigma2.size() != data.m() ||
        state.beta.size() != data.p()) {
        throw ValidationError("parameter state dimensions do not match the dataset");
    }
}

void require_hyper(const ModelSpec& spec, const Dataset& data) {
    if (spec.kind != ModelKind::Yc) {
        validate_hyperparams(spec.hyper, data);
    }
}

// Multiplier applied to b_i: exp(w_i' eta) for Stk2, 1 otherwise.
double b_multiplier(const ModelSpec& spec, const ParameterState& state, const Dataset& data,
                    Eigen::Index i) {
    if (spec.kind != ModelKind::Stk2) {
        return 1.0;
    }
    if (state.eta.size() != data.q()) {
        throw ValidationError("eta length does not match the variance covariates");
    }
    return std::exp(data.W().row(i).dot(state.eta));
}

}  // namespace

NormalParams theta_conditional(const ParameterState& state, const Dataset& data, Eigen::Index i) {
    require_state_dims(state, data);
    const double s2 = state.sigma2(i);
    const double t2 = state.tau2;
    const double zb = data.Z().row(i).dot(state.beta);
    return {(t2 * data.x()(i) + s2 * zb) / (t2 + s2), t2 * s2 / (t2 + s2)};
}

namespace {

// Core arithmetic without the O(m) validation; the public entry points
// validate once.
InverseGammaParams sigma2_conditional_unchecked(const ParameterState& state, const Dataset& data,
                                                const ModelSpec& spec, Eigen::Index i) {
    const double n = static_cast<double>(data.n()(i));
    const double resid = data.x()(i) - state.theta(i);
    const double data_scale = 0.5 * resid * resid + 0.5 * (n - 1.0) * data.s2()(i);
    if (spec.kind == ModelKind::Yc) {
        return {0.5 * n, data_scale};
    }
    const double prior_scale = spec.hyper.b(i) * b_multiplier(spec, state, data, i) * state.gamma;
    return {0.5 * n + spec.hyper.a(i), data_scale + prior_scale};
}

}  // namespace

InverseGammaParams sigma2_conditional(const ParameterState& state, const Dataset& data,
                                      const ModelSpec& spec, Eigen::Index i) {
    require_state_dims(state, data);
    require_hyper(spec, data);
    return sigma2_conditional_unchecked(state, data, spec, i);
}

MvnParams beta_conditional(const ParameterState& state, const Dataset& data) {
    require_state_dims(state, data);
    const Eigen::MatrixXd ztz = data.Z().transpose() * data.Z();
    Eigen::LLT<Eigen::MatrixXd> llt(ztz);
    if (llt.info() != Eigen::Success) {
        throw NumericError("Z'Z is singular; the regression coefficients are not identifiable");
    }
    const Eigen::MatrixXd ztz_inv =
        llt.solve(Eigen::MatrixXd::Identity(data.p(), data.p()));
    return {ztz_inv * (data.Z().transpose() * state.theta), state.tau2 * ztz_inv};
}

InverseGammaParams tau2_conditional(const ParameterState& state, const Dataset& data) {
    require_state_dims(state, data);
    const Eigen::Index m = data.m();
    if (m <= 2) {
        throw ValidationError("the tau2 conditional requires m > 2");
    }
    const double rss = (state.theta - data.Z() * state.beta).squaredNorm();
    if (rss <= 0.0) {
        throw DegenerateStateError(
            "theta equals Z beta exactly; the tau2 conditional has zero scale");
    }
    return {0.5 * static_cast<double>(m) - 1.0, 0.5 * rss};
}

GammaParams gamma_conditional(const ParameterState& state, const Dataset& data,
                              const ModelSpec& spec) {
    require_state_dims(state, data);
    require_hyper(spec, data);
    double rate = 0.0;
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        rate += spec.hyper.b(i) * b_multiplier(spec, state, data, i) / state.sigma2(i);
    }
    return {spec.hyper.a.sum() + 1.0, rate};
}

double mh_log_acceptance_ratio(const Dataset& data, const HyperParams& hyper, double gamma,
                               const Eigen::VectorXd& sigma2, const Eigen::VectorXd& eta0,
                               const Eigen::VectorXd& eta_star) {
    if (eta0.size() != data.q() || eta_star.size() != data.q() || sigma2.size() != data.m()) {
        throw ValidationError("eta or sigma2 length does not match the dataset");
    }
    double log_ratio = 0.0;
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        const double ws = data.W().row(i).dot(eta_star);
        const double w0 = data.W().row(i).dot(eta0);
        log_ratio += hyper.a(i) * (ws - w0) -
                     hyper.b(i) * gamma * (std::exp(ws) - std::exp(w0)) / sigma2(i);
    }
    return log_ratio;
}

Eigen::VectorXd update_theta(const ParameterState& state, const Dataset& data, RandomSource& rng) {
    Eigen::VectorXd theta(data.m());
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        const NormalParams cond = theta_conditional(state, data, i);
        theta(i) = cond.mean + std::sqrt(cond.var) * rng.normal();
    }
    return theta;
}

Eigen::VectorXd update_sigma2(const ParameterState& state, const Dataset& data,
                              const ModelSpec& spec, RandomSource& rng) {
    require_state_dims(state, data);
    require_hyper(spec, data);
    Eigen::VectorXd sigma2(data.m());
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        sigma2(i) = sample_inverse_gamma(sigma2_conditional_unchecked(state, data, spec, i), rng);
    }
    return sigma2;
}

Eigen::VectorXd update_beta(const ParameterState& state, const Dataset& data, RandomSource& rng) {
    return sample_mvn(beta_conditional(state, data), rng);
}

double update_tau2(const ParameterState& state, const Dataset& data, RandomSource& rng) {
    return sample_inverse_gamma(tau2_conditional(state, data), rng);
}

double update_gamma(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                    RandomSource& rng) {
    return sample_gamma(gamma_conditional(state, data, spec), rng);
}

MhResult mh_update_eta(const ParameterState& state, const Dataset& data, const ModelSpec& spec,
                       double step_c, RandomSource& rng) {
    if (spec.kind != ModelKind::Stk2) {
        throw ValidationError("the eta update applies only to stk2");
    }
    if (!(step_c > 0.0) || !std::isfinite(step_c)) {
        throw ValidationError("the MH step variance c must be positive");
    }
    require_hyper(spec, data);
    const double sd = std::sqrt(step_c);
    Eigen::VectorXd proposal(data.q());
    for (Eigen::Index k = 0; k < data.q(); ++k) {
        proposal(k) = state.eta(k) + sd * rng.normal();
    }
    const double log_ratio =
        mh_log_acceptance_ratio(data, spec.hyper, state.gamma, state.sigma2, state.eta, proposal);
    const double u = rng.uniform();
    if (std::log(u) < log_ratio) {
        return {proposal, true};
    }
    return {state.eta, false};
}

ParameterState init_state(const Dataset& data, const ModelSpec& spec, RandomSource& /*rng*/) {
    const ConditionReport report = check_conditions(data, spec);
    if (!report.proper) {
        std::string names;
        for (const ConditionViolation& v : report.violations) {
            if (v.name == "m>p+6") continue;  // finite-variance only
            if (!names.empty()) names += ", ";
            names += v.name + " (" + v.detail + ")";
        }
        throw ValidationError("posterior propriety conditions violated: " + names);
    }
    if (spec.kind == ModelKind::Stk2) {
        validate_variance_covariates(data);
    }
    require_hyper(spec, data);

    const Eigen::Index m = data.m();
    ParameterState state;
    state.theta = data.x();
    state.sigma2 = data.s2();
    state.beta = data.Z().colPivHouseholderQr().solve(data.x());

    const Eigen::VectorXd resid = data.x() - data.Z() * state.beta;
    double var = 0.0;
    if (m >= 2) {
        const double mean = resid.mean();
        var = (resid.array() - mean).square().sum() / static_cast<double>(m - 1);
    }
    state.tau2 = std::max(var, 1e-8);

    double gamma = 0.0;
    if (spec.kind != ModelKind::Yc) {
        for (Eigen::Index i = 0; i < m; ++i) {
            gamma += state.sigma2(i) * (spec.hyper.a(i) - 1.0) / spec.hyper.b(i);
        }
        gamma /= static_cast<double>(m);
    } else {
        gamma = 1.0;  // unused by the Yc conditionals; kept positive
    }
    state.gamma = std::max(gamma, 1e-8);

    state.eta = Eigen::VectorXd::Zero(spec.kind == ModelKind::Stk2 ? data.q() : 0);
    return state;
}

ChainResult run_chain(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config) {
    if (config.n_draws < 1) {
        throw ValidationError("n_draws must be at least 1");
    }
    if (config.thin < 1) {
        throw ValidationError("thin must be at least 1");
    }
    RandomSource rng(config.seed);
    ParameterState state = init_state(data, spec, rng);

    std::vector<ParameterState> kept;
    kept.reserve(config.n_draws);
    std::size_t mh_attempted = 0;
    std::size_t mh_accepted = 0;

    const std::size_t total = config.burn_in + config.n_draws * config.thin;
    for (std::size_t sweep = 1; sweep <= total; ++sweep) {
        try {
            state.theta = update_theta(state, data, rng);
            state.sigma2 = update_sigma2(state, data, spec, rng);
            state.beta = update_beta(state, data, rng);
            state.tau2 = update_tau2(state, data, rng);
            if (spec.kind != ModelKind::Yc) {
                state.gamma = update_gamma(state, data, spec, rng);
            }
            if (spec.kind == ModelKind::Stk2) {
                MhResult mh = mh_update_eta(state, data, spec, config.mh_step_c, rng);
                state.eta = std::move(mh.eta);
                ++mh_attempted;
                mh_accepted += mh.accepted ? 1 : 0;
            }
        } catch (const DegenerateStateError& e) {
            throw DegenerateStateError(std::string(e.what()) + " (sweep " +
                                       std::to_string(sweep) + ")");
        }
        if (sweep > config.burn_in && (sweep - config.burn_in) % config.thin == 0) {
            kept.push_back(state);
        }
    }

    ChainDiagnostics diag;
    diag.n_kept = kept.size();
    if (spec.kind == ModelKind::Stk2) {
        diag.mh_accept_rate =
            static_cast<double>(mh_accepted) / static_cast<double>(mh_attempted);
    }
    const Eigen::Index eta_dim = spec.kind == ModelKind::Stk2 ? data.q() : 0;
    return {PosteriorDraws(std::move(kept), spec, data.m(), data.p(), eta_dim), diag};
}

}  // namespace fhvar
