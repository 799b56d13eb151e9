#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fhvar {

/// One small area's direct survey estimates and covariates.
struct AreaObservation {
    double x = 0.0;        ///< direct mean estimate
    double s2 = 1.0;       ///< direct sampling-variance estimate, > 0
    int n = 2;             ///< area sample size, >= 2
    Eigen::VectorXd z;     ///< mean covariates (length p)
    Eigen::VectorXd w;     ///< variance covariates (length q, may be empty)
};

/// Validated collection of area observations with consistent covariate
/// dimensions. The per-area invariants (s2 > 0, n >= 2, finite entries)
/// are enforced at construction so downstream code can rely on them.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<AreaObservation> areas);

    Eigen::Index m() const { return static_cast<Eigen::Index>(areas_.size()); }
    Eigen::Index p() const { return p_; }
    Eigen::Index q() const { return q_; }

    const std::vector<AreaObservation>& areas() const { return areas_; }
    const AreaObservation& area(Eigen::Index i) const { return areas_[static_cast<std::size_t>(i)]; }

    const Eigen::VectorXd& x() const { return x_; }
    const Eigen::VectorXd& s2() const { return s2_; }
    const Eigen::VectorXi& n() const { return n_; }
    const Eigen::MatrixXd& Z() const { return Z_; }  ///< m x p
    const Eigen::MatrixXd& W() const { return W_; }  ///< m x q

private:
    std::vector<AreaObservation> areas_;
    Eigen::Index p_ = 0;
    Eigen::Index q_ = 0;
    Eigen::VectorXd x_;
    Eigen::VectorXd s2_;
    Eigen::VectorXi n_;
    Eigen::MatrixXd Z_;
    Eigen::MatrixXd W_;
};

/// User-specified prior constants a_i, b_i for the variance hierarchy:
/// sigma_i^2 ~ InverseGamma(a_i, b_i * gamma).
struct HyperParams {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
};

enum class ModelKind {
    Stk1,  ///< shared inverse-gamma shrinkage prior on the sampling variances
    Stk2,  ///< covariate-dependent variance prior, eta updated by an MH step
    Yc,    ///< baseline with a flat variance prior (no variance shrinkage)
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct ModelSpec {
    ModelKind kind = ModelKind::Stk1;
    HyperParams hyper;  ///< ignored for Yc
};

struct ConditionViolation {
    std::string name;    ///< fixed identifier, e.g. "m>p+2"
    std::string detail;  ///< human-readable context
};

/// Result of checking the posterior propriety and finite-variance
/// conditions for a dataset/model pair.
struct ConditionReport {
    bool proper = false;
    bool finite_variance = false;
    std::vector<ConditionViolation> violations;
    Eigen::VectorXi t;  ///< sign products per variance covariate (Stk2 only)

    bool has_violation(const std::string& name) const;
};

/// Default prior constants: a_i = 2 and b_i = 1/n_i.
HyperParams default_hyperparams(const Dataset& dataset);

/// Throws ValidationError unless the hyperparameters are positive, finite,
/// and sized to the dataset.
void validate_hyperparams(const HyperParams& hyper, const Dataset& dataset);

/// t_k = sgn(sum_i a_i w_ik) * sgn(sum_i n_i w_ik) for each variance
/// covariate column; empty when q = 0.
Eigen::VectorXi compute_t(const Dataset& dataset, const HyperParams& hyper);

/// Evaluates the propriety conditions (m > p+2, n_i > 1, rank(Z) = p, and
/// for Stk2 also t_k = 1 for every k) and the finite-posterior-variance
/// strengthening m > p+6. Reports, never throws.
ConditionReport check_conditions(const Dataset& dataset, const ModelSpec& spec);

/// For Stk2, rejects constant variance-covariate columns (gamma and the
/// corresponding eta coefficient would not be identifiable).
void validate_variance_covariates(const Dataset& dataset);

}  // namespace fhvar
