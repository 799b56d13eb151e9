#include "fhvar/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "fhvar/errors.hpp"

namespace fhvar {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

// Marsaglia-Tsang squeeze for shape >= 1, unit rate.
double sample_std_gamma_shape_ge1(double shape, RandomSource& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
            return d * v;
        }
    }
}

}  // namespace

void validate(const GammaParams& params) {
    if (!positive_finite(params.shape) || !positive_finite(params.rate)) {
        throw ValidationError("gamma parameters must be positive and finite (shape=" +
                              std::to_string(params.shape) + ", rate=" +
                              std::to_string(params.rate) + ")");
    }
}

void validate(const InverseGammaParams& params) {
    if (!positive_finite(params.shape) || !positive_finite(params.scale)) {
        throw ValidationError("inverse-gamma parameters must be positive and finite (shape=" +
                              std::to_string(params.shape) + ", scale=" +
                              std::to_string(params.scale) + ")");
    }
}

void validate(const MvnParams& params) {
    const Eigen::Index p = params.mean.size();
    if (params.covariance.rows() != p || params.covariance.cols() != p) {
        throw ValidationError("covariance dimensions do not match the mean length");
    }
    if (!params.mean.allFinite() || !params.covariance.allFinite()) {
        throw ValidationError("multivariate normal parameters must be finite");
    }
    const double scale = std::max(params.covariance.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = (params.covariance - params.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale) {
        throw ValidationError("covariance is not symmetric");
    }
}

double sample_gamma(const GammaParams& params, RandomSource& rng) {
    validate(params);
    if (params.shape < 1.0) {
        // Boost a shape+1 draw down: X = G * U^{1/shape}.
        const double g = sample_std_gamma_shape_ge1(params.shape + 1.0, rng);
        const double u = rng.uniform();
        const double x = g * std::pow(u, 1.0 / params.shape) / params.rate;
        return std::max(x, std::numeric_limits<double>::min());
    }
    return sample_std_gamma_shape_ge1(params.shape, rng) / params.rate;
}

double sample_inverse_gamma(const InverseGammaParams& params, RandomSource& rng) {
    validate(params);
    return 1.0 / sample_gamma({params.shape, params.scale}, rng);
}

Eigen::VectorXd sample_mvn(const MvnParams& params, RandomSource& rng) {
    validate(params);
    const Eigen::Index p = params.mean.size();
    Eigen::LLT<Eigen::MatrixXd> llt(params.covariance);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance is not positive definite; Cholesky factorization failed");
    }
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        z(i) = rng.normal();
    }
    return params.mean + llt.matrixL() * z;
}

double logpdf_normal(double x, double mean, double var) {
    if (!positive_finite(var) || !std::isfinite(mean)) {
        throw ValidationError("normal density needs a finite mean and positive variance");
    }
    if (!std::isfinite(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double d = x - mean;
    return -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
}

double logpdf_gamma(double x, const GammaParams& params) {
    validate(params);
    if (!(x > 0.0) || !std::isfinite(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    return params.shape * std::log(params.rate) - std::lgamma(params.shape) +
           (params.shape - 1.0) * std::log(x) - params.rate * x;
}

double logpdf_inverse_gamma(double x, const InverseGammaParams& params) {
    validate(params);
    if (!(x > 0.0) || !std::isfinite(x)) {
        return -std::numeric_limits<double>::infinity();
    }
    return params.shape * std::log(params.scale) - std::lgamma(params.shape) -
           (params.shape + 1.0) * std::log(x) - params.scale / x;
}

}  // namespace fhvar
