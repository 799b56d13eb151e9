#pragma once

#include <Eigen/Dense>

#include "fhvar/random.hpp"

namespace fhvar {

// Parameterizations are pinned once and used everywhere: Gamma(shape, rate)
// has density proportional to x^{shape-1} exp(-rate x), and
// InverseGamma(shape, scale) has density proportional to
// x^{-shape-1} exp(-scale / x).

struct GammaParams {
    double shape = 1.0;
    double rate = 1.0;
};

struct InverseGammaParams {
    double shape = 1.0;
    double scale = 1.0;
};

struct MvnParams {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
};

/// Throws ValidationError unless shape > 0 and rate > 0 (and finite).
void validate(const GammaParams& params);

/// Throws ValidationError unless shape > 0 and scale > 0 (and finite).
void validate(const InverseGammaParams& params);

/// Throws ValidationError unless the covariance is square, matches the
/// mean's length, and is symmetric to 1e-10 relative.
void validate(const MvnParams& params);

/// Gamma(shape, rate) draw. Valid for every shape > 0, including
/// shape < 1 (Marsaglia-Tsang with the small-shape power boost).
double sample_gamma(const GammaParams& params, RandomSource& rng);

/// InverseGamma(shape, scale) draw: the reciprocal of a
/// Gamma(shape, rate = scale) draw.
double sample_inverse_gamma(const InverseGammaParams& params, RandomSource& rng);

/// Multivariate normal draw via a Cholesky factor of the covariance.
/// Throws NumericError if the covariance is not positive definite.
Eigen::VectorXd sample_mvn(const MvnParams& params, RandomSource& rng);

// Log densities including normalizing constants. Points outside the open
// support yield -infinity rather than an error.

double logpdf_normal(double x, double mean, double var);
double logpdf_gamma(double x, const GammaParams& params);
double logpdf_inverse_gamma(double x, const InverseGammaParams& params);

}  // namespace fhvar
