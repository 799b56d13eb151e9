#include "fhvar/simulation.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fhvar/distributions.hpp"
#include "fhvar/errors.hpp"
#include "fhvar/posterior.hpp"
#include "parallel.hpp"

namespace fhvar {

namespace {

void validate_config(const SimConfig& config) {
    if (config.m < 1) {
        throw ValidationError("simulation needs at least one area");
    }
    if (config.n.size() != config.m) {
        throw ValidationError("one sample size per area is required");
    }
    for (Eigen::Index i = 0; i < config.m; ++i) {
        if (config.n(i) < 2) {
            throw ValidationError("per-area sample sizes must be at least 2");
        }
    }
    if (!(config.tau2 >= 0.0) || !std::isfinite(config.tau2)) {
        throw ValidationError("tau2 must be nonnegative");
    }
    if (!(config.z_range.first < config.z_range.second)) {
        throw ValidationError("z_range must be an ordered pair");
    }
    if (const auto* u = std::get_if<UniformRegime>(&config.variance_regime)) {
        if (!(u->lo < u->hi) || !(u->lo > 0.0)) {
            throw ValidationError("uniform variance regime needs 0 < lo < hi");
        }
    } else {
        const auto& ig = std::get<IgRegime>(config.variance_regime);
        if (!(ig.shape > 0.0) || !(ig.scale_coef > 0.0)) {
            throw ValidationError("inverse-gamma variance regime needs positive shape and scale");
        }
    }
    if (config.replications < 1) {
        throw ValidationError("at least one replication is required");
    }
}

std::string method_label(const std::vector<ModelSpec>& methods, std::size_t k) {
    std::string label = to_string(methods[k].kind);
    for (std::size_t j = 0; j < k; ++j) {
        if (methods[j].kind == methods[k].kind) {
            label += "#" + std::to_string(k + 1);
            break;
        }
    }
    return label;
}

}  // namespace

SimConfig SimConfig::with_constant_n(Eigen::Index m, int n) {
    SimConfig config;
    config.m = m;
    config.n = Eigen::VectorXi::Constant(m, n);
    return config;
}

std::pair<Dataset, SimTruth> generate_replication(const SimConfig& config, RandomSource& rng) {
    validate_config(config);
    const Eigen::Index m = config.m;

    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z(i) = rng.uniform(config.z_range.first, config.z_range.second);
    }

    Eigen::VectorXd sigma2(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (const auto* u = std::get_if<UniformRegime>(&config.variance_regime)) {
            sigma2(i) = rng.uniform(u->lo, u->hi);
        } else {
            const auto& ig = std::get<IgRegime>(config.variance_regime);
            sigma2(i) = sample_inverse_gamma(
                {ig.shape, ig.scale_coef * std::exp(ig.z_coef * z(i))}, rng);
        }
    }

    const double tau = std::sqrt(config.tau2);
    Eigen::VectorXd theta(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        theta(i) = config.beta0 + config.beta1 * z(i) + tau * rng.normal();
    }

    std::vector<AreaObservation> areas;
    areas.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const int n = config.n(i);
        // Unit-level responses X_ij = theta_i + e_ij, e_ij ~ N(0, n sigma2),
        // so the area mean has variance sigma2.
        const double unit_sd = std::sqrt(static_cast<double>(n) * sigma2(i));
        Eigen::VectorXd obs(n);
        for (int j = 0; j < n; ++j) {
            obs(j) = theta(i) + unit_sd * rng.normal();
        }
        const double xbar = obs.mean();
        const double s2 = (obs.array() - xbar).square().sum() /
                          (static_cast<double>(n) * (n - 1.0));

        AreaObservation area;
        area.x = xbar;
        area.s2 = s2;
        area.n = n;
        area.z = Eigen::Vector2d(1.0, z(i));
        area.w = Eigen::VectorXd::Constant(1, z(i));
        areas.push_back(std::move(area));
    }
    return {Dataset(std::move(areas)), SimTruth{std::move(theta), std::move(sigma2)}};
}

MethodPerformance evaluate_method(const std::string& label,
                                  const std::vector<ReplicationEstimates>& estimates,
                                  const std::vector<SimTruth>& truths) {
    if (estimates.empty() || estimates.size() != truths.size()) {
        throw ValidationError("one estimate set per replication is required");
    }
    const Eigen::Index m = truths.front().theta.size();
    const std::size_t reps = truths.size();
    for (std::size_t r = 0; r < reps; ++r) {
        if (truths[r].theta.size() != m || truths[r].sigma2.size() != m ||
            estimates[r].theta_hat.size() != m || estimates[r].sigma2_hat.size() != m ||
            estimates[r].theta_ci95.rows() != m || estimates[r].theta_ci99.rows() != m) {
            throw ValidationError("replication dimensions disagree (replication " +
                                  std::to_string(r + 1) + ")");
        }
    }

    const double denom = static_cast<double>(m) * static_cast<double>(reps);
    MethodPerformance perf;
    perf.method = label;

    double covered95 = 0.0;
    double covered99 = 0.0;
    double abs_sum_theta = 0.0;
    double abs_sum_sigma2 = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        double signed_theta = 0.0;
        double signed_sigma2 = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const double e_theta = estimates[r].theta_hat(i) - truths[r].theta(i);
            const double e_sigma2 = estimates[r].sigma2_hat(i) - truths[r].sigma2(i);
            perf.mse_theta += e_theta * e_theta;
            perf.mse_sigma2 += e_sigma2 * e_sigma2;
            signed_theta += e_theta;
            signed_sigma2 += e_sigma2;
            abs_sum_theta += std::abs(e_theta);
            abs_sum_sigma2 += std::abs(e_sigma2);
            const double truth = truths[r].theta(i);
            covered95 += (estimates[r].theta_ci95(i, 0) <= truth &&
                          truth <= estimates[r].theta_ci95(i, 1))
                             ? 1.0
                             : 0.0;
            covered99 += (estimates[r].theta_ci99(i, 0) <= truth &&
                          truth <= estimates[r].theta_ci99(i, 1))
                             ? 1.0
                             : 0.0;
        }
        perf.bias_theta += std::abs(signed_theta);
        perf.bias_sigma2 += std::abs(signed_sigma2);
    }
    perf.mse_theta /= denom;
    perf.bias_theta /= denom;
    perf.mse_sigma2 /= denom;
    perf.bias_sigma2 /= denom;
    perf.cp95 = covered95 / denom;
    perf.cp99 = covered99 / denom;

    // |sum of errors| <= sum of |errors| must hold exactly.
    if (perf.bias_theta > abs_sum_theta / denom + 1e-9 ||
        perf.bias_sigma2 > abs_sum_sigma2 / denom + 1e-9) {
        throw NumericError("bias aggregation violated the triangle inequality");
    }
    return perf;
}

ExperimentReport evaluate(const std::vector<std::string>& labels,
                          const std::vector<std::vector<ReplicationEstimates>>& per_method,
                          const std::vector<SimTruth>& truths) {
    if (labels.size() != per_method.size()) {
        throw ValidationError("one label per method is required");
    }
    ExperimentReport report;
    for (std::size_t k = 0; k < per_method.size(); ++k) {
        report.rows.push_back(evaluate_method(labels[k], per_method[k], truths));
    }
    return report;
}

ExperimentReport run_experiment(const SimConfig& config, const std::vector<ModelSpec>& methods,
                                const SamplerConfig& sampler_config, unsigned jobs) {
    validate_config(config);
    if (methods.empty()) {
        throw ValidationError("at least one method is required");
    }

    const std::size_t reps = static_cast<std::size_t>(config.replications);
    std::vector<SimTruth> truths(reps);
    std::vector<std::vector<ReplicationEstimates>> per_method(
        methods.size(), std::vector<ReplicationEstimates>(reps));

    detail::parallel_for(reps, jobs, [&](std::size_t r) {
        RandomSource data_rng(mix_seed(config.seed, r + 1, 0));
        auto [data, truth] = generate_replication(config, data_rng);
        truths[r] = std::move(truth);

        for (std::size_t k = 0; k < methods.size(); ++k) {
            const std::string context =
                "replication " + std::to_string(r + 1) + ", method " + to_string(methods[k].kind);
            try {
                SamplerConfig chain_config = sampler_config;
                chain_config.seed = mix_seed(config.seed, r + 1, k + 1);
                const ChainResult chain = run_chain(data, methods[k], chain_config);
                const Eigen::MatrixXd draws = chain.draws.to_matrix();
                const Eigen::Index m = data.m();

                ReplicationEstimates est;
                est.theta_hat = draws.leftCols(m).colwise().mean();
                est.sigma2_hat = draws.middleCols(m, m).colwise().mean();
                est.theta_ci95.resize(m, 2);
                est.theta_ci99.resize(m, 2);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const CredibleInterval ci95 = credible_interval(draws.col(i), 0.95);
                    const CredibleInterval ci99 = credible_interval(draws.col(i), 0.99);
                    est.theta_ci95(i, 0) = ci95.lower;
                    est.theta_ci95(i, 1) = ci95.upper;
                    est.theta_ci99(i, 0) = ci99.lower;
                    est.theta_ci99(i, 1) = ci99.upper;
                }
                per_method[k][r] = std::move(est);
            } catch (const ValidationError& e) {
                throw ValidationError(context + ": " + e.what());
            } catch (const DegenerateStateError& e) {
                throw DegenerateStateError(context + ": " + e.what());
            } catch (const NumericError& e) {
                throw NumericError(context + ": " + e.what());
            }
        }
    });

    std::vector<std::string> labels;
    labels.reserve(methods.size());
    for (std::size_t k = 0; k < methods.size(); ++k) {
        labels.push_back(method_label(methods, k));
    }
    return evaluate(labels, per_method, truths);
}

}  // namespace fhvar
