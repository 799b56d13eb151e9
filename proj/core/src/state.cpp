#include "fhvar/state.hpp"

#include "fhvar/errors.hpp"

namespace fhvar {

Eigen::VectorXd flatten(const ParameterState& state) {
    const Eigen::Index m = state.theta.size();
    const Eigen::Index p = state.beta.size();
    const Eigen::Index q = state.eta.size();
    Eigen::VectorXd out(flat_dim(m, p, q));
    out.segment(0, m) = state.theta;
    out.segment(m, m) = state.sigma2;
    out.segment(2 * m, p) = state.beta;
    out(2 * m + p) = state.tau2;
    out(2 * m + p + 1) = state.gamma;
    out.segment(2 * m + p + 2, q) = state.eta;
    return out;
}

std::vector<std::string> parameter_names(Eigen::Index m, Eigen::Index p, Eigen::Index q) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(flat_dim(m, p, q)));
    for (Eigen::Index i = 1; i <= m; ++i) names.push_back("theta_" + std::to_string(i));
    for (Eigen::Index i = 1; i <= m; ++i) names.push_back("sigma2_" + std::to_string(i));
    for (Eigen::Index j = 1; j <= p; ++j) names.push_back("beta_" + std::to_string(j));
    names.push_back("tau2");
    names.push_back("gamma");
    for (Eigen::Index k = 1; k <= q; ++k) names.push_back("eta_" + std::to_string(k));
    return names;
}

PosteriorDraws::PosteriorDraws(std::vector<ParameterState> states, ModelSpec spec,
                               Eigen::Index m, Eigen::Index p, Eigen::Index q)
    : states_(std::move(states)), spec_(std::move(spec)), m_(m), p_(p), q_(q) {
    if (states_.empty()) {
        throw ValidationError("posterior draws must contain at least one state");
    }
    for (const ParameterState& s : states_) {
        if (s.theta.size() != m_ || s.sigma2.size() != m_ || s.beta.size() != p_ ||
            s.eta.size() != q_) {
            throw ValidationError("posterior draws contain a dimensionally inconsistent state");
        }
    }
    names_ = parameter_names(m_, p_, q_);
}

Eigen::VectorXd PosteriorDraws::column(Eigen::Index j) const {
    const Eigen::Index n = static_cast<Eigen::Index>(states_.size());
    if (j < 0 || j >= flat_dim(m_, p_, q_)) {
        throw ValidationError("parameter index out of range");
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const ParameterState& s = states_[static_cast<std::size_t>(r)];
        if (j < m_) {
            out(r) = s.theta(j);
        } else if (j < 2 * m_) {
            out(r) = s.sigma2(j - m_);
        } else if (j < 2 * m_ + p_) {
            out(r) = s.beta(j - 2 * m_);
        } else if (j == 2 * m_ + p_) {
            out(r) = s.tau2;
        } else if (j == 2 * m_ + p_ + 1) {
            out(r) = s.gamma;
        } else {
            out(r) = s.eta(j - 2 * m_ - p_ - 2);
        }
    }
    return out;
}

Eigen::MatrixXd PosteriorDraws::to_matrix() const {
    const Eigen::Index n = static_cast<Eigen::Index>(states_.size());
    Eigen::MatrixXd out(n, flat_dim(m_, p_, q_));
    for (Eigen::Index r = 0; r < n; ++r) {
        out.row(r) = flatten(states_[static_cast<std::size_t>(r)]).transpose();
    }
    return out;
}

}  // namespace fhvar
