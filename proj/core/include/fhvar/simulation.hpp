#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fhvar/model.hpp"
#include "fhvar/random.hpp"
#include "fhvar/sampler.hpp"

namespace fhvar {

/// True sampling variances drawn as sigma_i^2 ~ IG(shape, scale_coef *
/// exp(z_coef * z_i)).
struct IgRegime {
    double shape = 10.0;
    double scale_coef = 5.0;
    double z_coef = 0.3;
};

/// True sampling variances drawn as sigma_i^2 ~ U(lo, hi).
struct UniformRegime {
    double lo = 0.5;
    double hi = 5.0;
};

using VarianceRegime = std::variant<IgRegime, UniformRegime>;

struct SimConfig {
    Eigen::Index m = 30;
    Eigen::VectorXi n;  ///< per-area sample sizes (all >= 2)
    double beta0 = 0.5;
    double beta1 = 0.8;
    double tau2 = 1.0;  ///< >= 0; zero disables the area random effect
    VarianceRegime variance_regime = IgRegime{};
    std::pair<double, double> z_range{2.0, 8.0};
    int replications = 200;
    std::uint64_t seed = 1;

    /// Convenience: every area gets the same sample size.
    static SimConfig with_constant_n(Eigen::Index m, int n);
};

struct SimTruth {
    Eigen::VectorXd theta;
    Eigen::VectorXd sigma2;
};

/// One synthetic dataset: z_i ~ U(z_range), sigma_i^2 from the regime,
/// theta_i = beta0 + beta1 z_i + u_i with u_i ~ N(0, tau2), unit-level
/// responses averaged into the direct estimates (x_i, s2_i). The dataset
/// carries (1, z_i) as the mean covariates and (z_i) as the variance
/// covariate.
std::pair<Dataset, SimTruth> generate_replication(const SimConfig& config, RandomSource& rng);

/// Point estimates and equal-tailed theta intervals from one fitted chain.
struct ReplicationEstimates {
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd sigma2_hat;
    Eigen::MatrixXd theta_ci95;  ///< m x 2 (lower, upper)
    Eigen::MatrixXd theta_ci99;  ///< m x 2
};

struct MethodPerformance {
    std::string method;
    double mse_theta = 0.0;
    double bias_theta = 0.0;
    double mse_sigma2 = 0.0;
    double bias_sigma2 = 0.0;
    std::optional<double> cp95;  ///< coverage as a fraction in [0, 1]
    std::optional<double> cp99;
};

struct ExperimentReport {
    std::vector<MethodPerformance> rows;
};

/// MSE = (mR)^-1 sum_i sum_r (est - truth)^2, Bias = (mR)^-1 sum_i
/// |sum_r (est - truth)|, coverage = (mR)^-1 sum_i sum_r 1{theta in CI}.
MethodPerformance evaluate_method(const std::string& label,
                                  const std::vector<ReplicationEstimates>& estimates,
                                  const std::vector<SimTruth>& truths);

ExperimentReport evaluate(const std::vector<std::string>& labels,
                          const std::vector<std::vector<ReplicationEstimates>>& per_method,
                          const std::vector<SimTruth>& truths);

/// Full Monte-Carlo study: per replication, generates one dataset, fits
/// every method on it with replication-derived seeds, takes posterior
/// means as point estimates plus equal-tailed 95%/99% intervals, then
/// aggregates. Replications run concurrently on up to `jobs` threads
/// (0 = all cores); the result does not depend on the execution order.
ExperimentReport run_experiment(const SimConfig& config, const std::vector<ModelSpec>& methods,
                                const SamplerConfig& sampler_config, unsigned jobs = 0);

}  // namespace fhvar
