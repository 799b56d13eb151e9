#include "fhvar/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fhvar/distributions.hpp"
#include "fhvar/errors.hpp"
#include "parallel.hpp"

namespace fhvar {

namespace {

constexpr double kQuadRelTol = 1e-8;
// Integration bounds widen until the tail integrand is below this
// fraction of the peak.
const double kLogTailCut = std::log(1e-14);

double quantile_sorted(const std::vector<double>& sorted, double level) {
    const std::size_t n = sorted.size();
    const double h = static_cast<double>(n - 1) * level;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void require_level_in_unit_interval(double level) {
    if (!std::isfinite(level) || level <= 0.0 || level >= 1.0) {
        throw ValidationError("level must lie strictly between 0 and 1");
    }
}

// Integrates exp(logf(t)) dt over an adaptively widened interval around
// the integrand's peak, in peak-scaled form. Returns the log integral.
template <typename LogF>
double integrate_log_integrand(const LogF& logf, double t_lo, double t_hi,
                               std::size_t area_index) {
    if (!(t_lo < t_hi)) {
        const double mid = 0.5 * (t_lo + t_hi);
        t_lo = mid - 1.0;
        t_hi = mid + 1.0;
    }

    constexpr int kGrid = 129;
    double peak = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < kGrid; ++g) {
        const double t = t_lo + (t_hi - t_lo) * g / (kGrid - 1);
        peak = std::max(peak, logf(t));
    }
    if (!std::isfinite(peak)) {
        throw QuadratureError("marginal-likelihood integrand is zero everywhere on the "
                              "initial bracket (area " + std::to_string(area_index + 1) + ")",
                              area_index);
    }

    int guard = 0;
    while (logf(t_lo) > peak + kLogTailCut) {
        t_lo -= 1.0;
        peak = std::max(peak, logf(t_lo));
        if (++guard > 400) {
            throw QuadratureError("failed to bracket the marginal-likelihood integrand (area " +
                                  std::to_string(area_index + 1) + ")", area_index);
        }
    }
    guard = 0;
    while (logf(t_hi) > peak + kLogTailCut) {
        t_hi += 1.0;
        peak = std::max(peak, logf(t_hi));
        if (++guard > 400) {
            throw QuadratureError("failed to bracket the marginal-likelihood integrand (area " +
                                  std::to_string(area_index + 1) + ")", area_index);
        }
    }

    const double peak_scale = peak;
    auto scaled = [&](double t) { return std::exp(logf(t) - peak_scale); };
    double error = 0.0;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        scaled, t_lo, t_hi, 15, 0.1 * kQuadRelTol, &error);
    if (!std::isfinite(integral) || integral <= 0.0 || error > kQuadRelTol * integral) {
        throw QuadratureError("marginal-likelihood quadrature did not converge (area " +
                              std::to_string(area_index + 1) + ")", area_index);
    }
    return peak_scale + std::log(integral);
}

// Marginal log likelihood of one area with the sampling variance
// integrated out against its inverse-gamma prior.
double area_log_likelihood_integrated(double x, double s2, int n, double zb, double tau2,
                                      double prior_shape, double prior_scale,
                                      std::size_t area_index) {
    const double half_df = 0.5 * (n - 1);
    auto logf = [&](double t) {
        const double sigma2 = std::exp(t);
        return logpdf_normal(x, zb, tau2 + sigma2) +
               logpdf_gamma(s2, {half_df, half_df / sigma2}) +
               logpdf_inverse_gamma(sigma2, {prior_shape, prior_scale}) + t;
    };
    // Initial bracket from extreme prior quantiles.
    const double g_hi = boost::math::gamma_q_inv(prior_shape, 1e-12);
    const double g_lo = boost::math::gamma_p_inv(prior_shape, 1e-12);
    const double t_lo = std::log(prior_scale / g_hi);
    const double t_hi = std::log(prior_scale / g_lo);
    return integrate_log_integrand(logf, t_lo, t_hi, area_index);
}

void validate_phi(const Phi& phi, const Dataset& data, const ModelSpec& spec) {
    if (phi.beta.size() != data.p() || !phi.beta.allFinite()) {
        throw ValidationError("phi.beta must be finite with one entry per mean covariate");
    }
    if (!std::isfinite(phi.tau2) || phi.tau2 <= 0.0) {
        throw ValidationError("phi.tau2 must be positive");
    }
    switch (spec.kind) {
        case ModelKind::Stk1:
        case ModelKind::Stk2: {
            if (!phi.gamma.has_value() || !std::isfinite(*phi.gamma) || *phi.gamma <= 0.0) {
                throw ValidationError("phi.gamma must be positive for stk1/stk2");
            }
            if (phi.sigma2.size() != 0) {
                throw ValidationError("phi.sigma2 does not belong to the stk1/stk2 parameter set");
            }
            const Eigen::Index want_q = spec.kind == ModelKind::Stk2 ? data.q() : 0;
            if (phi.eta.size() != want_q || !phi.eta.allFinite()) {
                throw ValidationError("phi.eta has the wrong length for this model");
            }
            validate_hyperparams(spec.hyper, data);
            break;
        }
        case ModelKind::Yc: {
            if (phi.gamma.has_value() || phi.eta.size() != 0) {
                throw ValidationError("phi.gamma/phi.eta do not belong to the yc parameter set");
            }
            if (phi.sigma2.size() != data.m() || !phi.sigma2.allFinite() ||
                (phi.sigma2.array() <= 0.0).any()) {
                throw ValidationError("phi.sigma2 must be positive with one entry per area");
            }
            break;
        }
    }
}

}  // namespace

Eigen::Index Summary::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw ValidationError("unknown parameter '" + name + "'");
    }
    return static_cast<Eigen::Index>(it - names.begin());
}

double sample_quantile(Eigen::VectorXd values, double level) {
    if (values.size() == 0) {
        throw ValidationError("cannot take a quantile of an empty sample");
    }
    if (!std::isfinite(level) || level < 0.0 || level > 1.0) {
        throw ValidationError("quantile level must lie in [0, 1]");
    }
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, level);
}

Summary summarize_matrix(const Eigen::MatrixXd& draws, std::vector<std::string> names,
                         std::vector<double> quantile_levels) {
    const Eigen::Index n = draws.rows();
    const Eigen::Index d = draws.cols();
    if (n == 0) {
        throw ValidationError("cannot summarize an empty set of draws");
    }
    if (n < 2) {
        throw ValidationError("summaries need at least two draws");
    }
    if (static_cast<Eigen::Index>(names.size()) != d) {
        throw ValidationError("one name per parameter column is required");
    }
    for (double level : quantile_levels) {
        if (!std::isfinite(level) || level < 0.0 || level > 1.0) {
            throw ValidationError("quantile levels must lie in [0, 1]");
        }
    }

    Summary out;
    out.names = std::move(names);
    out.levels = std::move(quantile_levels);
    out.mean = draws.colwise().mean();
    out.sd.resize(d);
    out.quantiles.resize(d, static_cast<Eigen::Index>(out.levels.size()));

    std::vector<double> sorted;
    for (Eigen::Index j = 0; j < d; ++j) {
        out.sd(j) = std::sqrt((draws.col(j).array() - out.mean(j)).square().sum() /
                              static_cast<double>(n - 1));
        sorted.assign(draws.col(j).data(), draws.col(j).data() + n);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t l = 0; l < out.levels.size(); ++l) {
            out.quantiles(j, static_cast<Eigen::Index>(l)) = quantile_sorted(sorted, out.levels[l]);
        }
    }
    return out;
}

Summary summarize(const PosteriorDraws& draws, const std::vector<double>& quantile_levels) {
    return summarize_matrix(draws.to_matrix(), draws.names(), quantile_levels);
}

CredibleInterval credible_interval(const Eigen::VectorXd& draws, double level) {
    require_level_in_unit_interval(level);
    if (draws.size() == 0) {
        throw ValidationError("cannot form a credible interval from an empty sample");
    }
    std::vector<double> sorted(draws.data(), draws.data() + draws.size());
    std::sort(sorted.begin(), sorted.end());
    return {quantile_sorted(sorted, 0.5 * (1.0 - level)),
            quantile_sorted(sorted, 0.5 * (1.0 + level)), level};
}

CredibleInterval credible_interval(const PosteriorDraws& draws, Eigen::Index parameter,
                                   double level) {
    return credible_interval(draws.column(parameter), level);
}

Phi phi_from_state(const ParameterState& state, ModelKind kind) {
    Phi phi;
    phi.beta = state.beta;
    phi.tau2 = state.tau2;
    switch (kind) {
        case ModelKind::Stk1:
            phi.gamma = state.gamma;
            break;
        case ModelKind::Stk2:
            phi.gamma = state.gamma;
            phi.eta = state.eta;
            break;
        case ModelKind::Yc:
            phi.sigma2 = state.sigma2;
            break;
    }
    return phi;
}

Phi posterior_mean_phi(const PosteriorDraws& draws) {
    const double n = static_cast<double>(draws.n_draws());
    Phi mean = phi_from_state(draws.states().front(), draws.spec().kind);
    mean.beta.setZero();
    mean.tau2 = 0.0;
    if (mean.gamma.has_value()) *mean.gamma = 0.0;
    mean.eta.setZero();
    mean.sigma2.setZero();
    for (const ParameterState& s : draws.states()) {
        mean.beta += s.beta / n;
        mean.tau2 += s.tau2 / n;
        if (mean.gamma.has_value()) *mean.gamma += s.gamma / n;
        if (mean.eta.size() > 0) mean.eta += s.eta / n;
        if (mean.sigma2.size() > 0) mean.sigma2 += s.sigma2 / n;
    }
    return mean;
}

double marginal_log_likelihood(const Phi& phi, const Dataset& data, const ModelSpec& spec) {
    validate_phi(phi, data, spec);
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.m(); ++i) {
        const double zb = data.Z().row(i).dot(phi.beta);
        const int n = data.n()(i);
        if (spec.kind == ModelKind::Yc) {
            const double sigma2 = phi.sigma2(i);
            const double half_df = 0.5 * (n - 1);
            total += logpdf_normal(data.x()(i), zb, phi.tau2 + sigma2) +
                     logpdf_gamma(data.s2()(i), {half_df, half_df / sigma2});
        } else {
            double scale = spec.hyper.b(i) * *phi.gamma;
            if (spec.kind == ModelKind::Stk2) {
                scale *= std::exp(data.W().row(i).dot(phi.eta));
            }
            total += area_log_likelihood_integrated(data.x()(i), data.s2()(i), n, zb, phi.tau2,
                                                    spec.hyper.a(i), scale,
                                                    static_cast<std::size_t>(i));
        }
    }
    return total;
}

DicResult dic(const PosteriorDraws& draws, const Dataset& data, const ModelSpec& spec,
              unsigned jobs) {
    if (draws.n_draws() < 2) {
        throw ValidationError("DIC needs at least two draws");
    }
    const std::size_t n = draws.n_draws();
    std::vector<double> deviance(n);
    detail::parallel_for(n, jobs, [&](std::size_t r) {
        const Phi phi = phi_from_state(draws.states()[r], spec.kind);
        deviance[r] = -2.0 * marginal_log_likelihood(phi, data, spec);
    });
    double mean_deviance = 0.0;
    for (double d : deviance) {
        mean_deviance += d;
    }
    mean_deviance /= static_cast<double>(n);

    const double deviance_at_mean =
        -2.0 * marginal_log_likelihood(posterior_mean_phi(draws), data, spec);
    const double p_d = mean_deviance - deviance_at_mean;
    if (p_d < 0.0) {
        std::cerr << "fhvar: warning: negative effective parameter count (p_D = " << p_d
                  << ")\n";
    }
    return {2.0 * mean_deviance - deviance_at_mean, mean_deviance};
}

}  // namespace fhvar
