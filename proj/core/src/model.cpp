#include "fhvar/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "fhvar/errors.hpp"

namespace fhvar {

namespace {

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Dataset::Dataset(std::vector<AreaObservation> areas) : areas_(std::move(areas)) {
    const Eigen::Index m = static_cast<Eigen::Index>(areas_.size());
    if (m == 0) {
        return;
    }
    p_ = areas_.front().z.size();
    q_ = areas_.front().w.size();
    x_.resize(m);
    s2_.resize(m);
    n_.resize(m);
    Z_.resize(m, p_);
    W_.resize(m, q_);
    for (Eigen::Index i = 0; i < m; ++i) {
        const AreaObservation& obs = areas_[static_cast<std::size_t>(i)];
        const std::string row = " (area " + std::to_string(i + 1) + ")";
        if (!std::isfinite(obs.x)) {
            throw ValidationError("x must be finite" + row);
        }
        if (!std::isfinite(obs.s2) || obs.s2 <= 0.0) {
            throw ValidationError("s2 must be positive" + row);
        }
        if (obs.n < 2) {
            throw ValidationError("n must be at least 2" + row);
        }
        if (obs.z.size() != p_ || obs.w.size() != q_) {
            throw ValidationError("covariate dimensions differ across areas" + row);
        }
        if (!obs.z.allFinite() || !obs.w.allFinite()) {
            throw ValidationError("covariates must be finite" + row);
        }
        x_(i) = obs.x;
        s2_(i) = obs.s2;
        n_(i) = obs.n;
        Z_.row(i) = obs.z.transpose();
        W_.row(i) = obs.w.transpose();
    }
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Stk1: return "stk1";
        case ModelKind::Stk2: return "stk2";
        case ModelKind::Yc: return "yc";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "stk1") return ModelKind::Stk1;
    if (name == "stk2") return ModelKind::Stk2;
    if (name == "yc") return ModelKind::Yc;
    throw ValidationError("unknown model '" + name + "' (expected stk1, stk2, or yc)");
}

bool ConditionReport::has_violation(const std::string& name) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const ConditionViolation& v) { return v.name == name; });
}

HyperParams default_hyperparams(const Dataset& dataset) {
    const Eigen::Index m = dataset.m();
    HyperParams hyper;
    hyper.a = Eigen::VectorXd::Constant(m, 2.0);
    hyper.b.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        hyper.b(i) = 1.0 / static_cast<double>(dataset.n()(i));
    }
    return hyper;
}

void validate_hyperparams(const HyperParams& hyper, const Dataset& dataset) {
    if (hyper.a.size() != dataset.m() || hyper.b.size() != dataset.m()) {
        throw ValidationError("hyperparameter vectors must have one entry per area");
    }
    for (Eigen::Index i = 0; i < hyper.a.size(); ++i) {
        if (!std::isfinite(hyper.a(i)) || hyper.a(i) <= 0.0 ||
            !std::isfinite(hyper.b(i)) || hyper.b(i) <= 0.0) {
            throw ValidationError("hyperparameters a_i, b_i must be positive (area " +
                                  std::to_string(i + 1) + ")");
        }
    }
}

Eigen::VectorXi compute_t(const Dataset& dataset, const HyperParams& hyper) {
    validate_hyperparams(hyper, dataset);
    const Eigen::Index q = dataset.q();
    Eigen::VectorXi t(q);
    const Eigen::VectorXd n = dataset.n().cast<double>();
    for (Eigen::Index k = 0; k < q; ++k) {
        const double sa = hyper.a.dot(dataset.W().col(k));
        const double sn = n.dot(dataset.W().col(k));
        t(k) = sgn(sa) * sgn(sn);
    }
    return t;
}

ConditionReport check_conditions(const Dataset& dataset, const ModelSpec& spec) {
    const Eigen::Index m = dataset.m();
    const Eigen::Index p = dataset.p();
    const Eigen::Index q = dataset.q();

    ConditionReport report;
    bool proper = true;
    bool finite_extra = true;

    if (m <= p + 2) {
        proper = false;
        report.violations.push_back({"m>p+2", "m=" + std::to_string(m) + ", p=" + std::to_string(p)});
    }
    if (m <= p + 6) {
        finite_extra = false;
        report.violations.push_back({"m>p+6", "m=" + std::to_string(m) + ", p=" + std::to_string(p)});
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (dataset.n()(i) <= 1) {
            proper = false;
            report.violations.push_back({"n_i>1", "n=" + std::to_string(dataset.n()(i)) +
                                                      " (area " + std::to_string(i + 1) + ")"});
            break;
        }
    }

    Eigen::Index rank = 0;
    if (m > 0 && p > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(dataset.Z());
        const double tol = 1e-10 * svd.singularValues()(0);
        rank = (svd.singularValues().array() > tol).count();
    }
    if (rank != p) {
        proper = false;
        report.violations.push_back({"rank(Z)=p", "rank(Z)=" + std::to_string(rank) +
                                                      ", p=" + std::to_string(p)});
    }

    if (spec.kind == ModelKind::Stk2) {
        if (q < 1) {
            proper = false;
            report.violations.push_back({"q>=1", "stk2 requires at least one variance covariate"});
        } else {
            report.t = compute_t(dataset, spec.hyper);
            for (Eigen::Index k = 0; k < q; ++k) {
                if (report.t(k) != 1) {
                    proper = false;
                    report.violations.push_back(
                        {"t_k=1", "t_" + std::to_string(k + 1) + " = " + std::to_string(report.t(k))});
                }
            }
        }
    }

    report.proper = proper;
    report.finite_variance = proper && finite_extra;
    return report;
}

void validate_variance_covariates(const Dataset& dataset) {
    for (Eigen::Index k = 0; k < dataset.q(); ++k) {
        const double lo = dataset.W().col(k).minCoeff();
        const double hi = dataset.W().col(k).maxCoeff();
        if (lo == hi) {
            throw ValidationError("variance covariate column w" + std::to_string(k + 1) +
                                  " is constant; gamma and eta_" + std::to_string(k + 1) +
                                  " are not identifiable");
        }
    }
}

}  // namespace fhvar
