#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fhvar/model.hpp"
#include "fhvar/state.hpp"

namespace fhvar {

/// Per-parameter sample statistics over retained draws.
struct Summary {
    std::vector<std::string> names;
    Eigen::VectorXd mean;
    Eigen::VectorXd sd;
    std::vector<double> levels;   ///< quantile levels, as requested
    Eigen::MatrixXd quantiles;    ///< one row per parameter, one column per level

    Eigen::Index index_of(const std::string& name) const;
};

struct CredibleInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
};

/// Quantile by linear interpolation between order statistics
/// (h = (n-1) * level). `values` need not be sorted.
double sample_quantile(Eigen::VectorXd values, double level);

/// Means, sample standard deviations, and interpolated quantiles for every
/// column of a draws-by-parameter matrix. Requires at least two draws.
Summary summarize_matrix(const Eigen::MatrixXd& draws, std::vector<std::string> names,
                         std::vector<double> quantile_levels);

Summary summarize(const PosteriorDraws& draws, const std::vector<double>& quantile_levels);

/// Equal-tailed interval [q_(1-level)/2, q_(1+level)/2] of one parameter's
/// draws. Endpoints coincide exactly with summarize() quantiles at the
/// same levels.
CredibleInterval credible_interval(const Eigen::VectorXd& draws, double level);
CredibleInterval credible_interval(const PosteriorDraws& draws, Eigen::Index parameter,
                                   double level);

/// The model-parameter block phi that the deviance is a function of:
/// {beta, tau2, gamma} for Stk1, plus eta for Stk2; {beta, tau2, sigma2}
/// for Yc.
struct Phi {
    Eigen::VectorXd beta;
    double tau2 = 1.0;
    std::optional<double> gamma;
    Eigen::VectorXd eta;     ///< Stk2 only
    Eigen::VectorXd sigma2;  ///< Yc only
};

Phi phi_from_state(const ParameterState& state, ModelKind kind);

/// Component-wise arithmetic mean of phi over the retained draws.
Phi posterior_mean_phi(const PosteriorDraws& draws);

/// Log marginal likelihood of the data given phi. For Stk1/Stk2 each
/// area's sampling variance is integrated out by adaptive quadrature on
/// log sigma_i^2 (relative tolerance 1e-8); for Yc the variances are part
/// of phi and the closed form is used. Additive over areas.
double marginal_log_likelihood(const Phi& phi, const Dataset& data, const ModelSpec& spec);

struct DicResult {
    double dic = 0.0;
    double mean_deviance = 0.0;
};

/// DIC = 2 * mean(D(phi)) - D(mean(phi)) with D = -2 log marginal
/// likelihood. `jobs` bounds the worker threads for the per-draw deviance
/// evaluations (0 = all available cores); the result does not depend on it.
DicResult dic(const PosteriorDraws& draws, const Dataset& data, const ModelSpec& spec,
              unsigned jobs = 1);

}  // namespace fhvar
