#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fhvar/model.hpp"

namespace fhvar {

/// One point of the Markov chain.
struct ParameterState {
    Eigen::VectorXd theta;   ///< latent area means (length m)
    Eigen::VectorXd sigma2;  ///< sampling variances (length m, all > 0)
    Eigen::VectorXd beta;    ///< regression coefficients (length p)
    double tau2 = 1.0;       ///< random-effect variance, > 0
    double gamma = 1.0;      ///< variance-prior scale, > 0
    Eigen::VectorXd eta;     ///< variance-covariate coefficients (length q; empty unless Stk2)
};

/// Number of scalar parameters in a flattened state.
inline Eigen::Index flat_dim(Eigen::Index m, Eigen::Index p, Eigen::Index q) {
    return 2 * m + p + 2 + q;
}

/// Flattens a state in the fixed order theta, sigma2, beta, tau2, gamma, eta.
Eigen::VectorXd flatten(const ParameterState& state);

/// Names matching flatten(): theta_1..theta_m, sigma2_1..sigma2_m,
/// beta_1..beta_p, tau2, gamma, eta_1..eta_q.
std::vector<std::string> parameter_names(Eigen::Index m, Eigen::Index p, Eigen::Index q);

/// Retained post-burn-in states of one chain, column-addressable per
/// scalar parameter. Immutable once constructed.
class PosteriorDraws {
public:
    PosteriorDraws(std::vector<ParameterState> states, ModelSpec spec,
                   Eigen::Index m, Eigen::Index p, Eigen::Index q);

    std::size_t n_draws() const { return states_.size(); }
    Eigen::Index m() const { return m_; }
    Eigen::Index p() const { return p_; }
    Eigen::Index q() const { return q_; }
    const ModelSpec& spec() const { return spec_; }
    const std::vector<ParameterState>& states() const { return states_; }
    const std::vector<std::string>& names() const { return names_; }

    /// All draws of one flattened parameter.
    Eigen::VectorXd column(Eigen::Index j) const;

    /// Draws-by-parameter matrix (n_draws x flat_dim).
    Eigen::MatrixXd to_matrix() const;

private:
    std::vector<ParameterState> states_;
    ModelSpec spec_;
    Eigen::Index m_ = 0;
    Eigen::Index p_ = 0;
    Eigen::Index q_ = 0;
    std::vector<std::string> names_;
};

}  // namespace fhvar
