#include <algorithm>
#include <random>
#include <vector>

#include <doctest.h>

#include "fhvar/errors.hpp"
#include "fhvar/model.hpp"
#include "test_support.hpp"

using namespace fhvar;

namespace {

AreaObservation area(double x, double s2, int n, std::vector<double> z,
                     std::vector<double> w = {}) {
    AreaObservation out;
    out.x = x;
    out.s2 = s2;
    out.n = n;
    out.z = Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
    out.w = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    return out;
}

Dataset random_dataset(std::uint64_t seed, Eigen::Index m, Eigen::Index p, Eigen::Index q) {
    RandomSource rng(seed);
    std::vector<AreaObservation> areas;
    for (Eigen::Index i = 0; i < m; ++i) {
        AreaObservation a;
        a.x = 2.0 * rng.normal();
        a.s2 = rng.uniform(0.5, 3.0);
        a.n = 3 + static_cast<int>(rng.uniform() * 10);
        a.z.resize(p);
        a.z(0) = 1.0;
        for (Eigen::Index j = 1; j < p; ++j) a.z(j) = rng.uniform(-2.0, 2.0);
        a.w.resize(q);
        for (Eigen::Index k = 0; k < q; ++k) a.w(k) = rng.uniform(0.5, 3.0);
        areas.push_back(std::move(a));
    }
    return Dataset(std::move(areas));
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("default hyperparameters are a=2, b=1/n") {
    const auto [data, truth] = test_support::standard_dataset(30, 7);
    const HyperParams hyper = default_hyperparams(data);
    CHECK(hyper.a.size() == 30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        CHECK(hyper.a(i) == 2.0);
        CHECK(hyper.b(i) == 1.0 / 7.0);
    }

    Dataset mixed({area(0, 1, 3, {1.0}), area(0, 1, 4, {1.0}), area(0, 1, 5, {1.0})});
    const HyperParams h2 = default_hyperparams(mixed);
    CHECK(h2.b(0) == 1.0 / 3.0);
    CHECK(h2.b(1) == 1.0 / 4.0);
    CHECK(h2.b(2) == 1.0 / 5.0);

    const HyperParams empty = default_hyperparams(Dataset{});
    CHECK(empty.a.size() == 0);
    CHECK(empty.b.size() == 0);
}

TEST_CASE("dataset construction enforces the per-area invariants") {
    CHECK_THROWS_WITH_AS(Dataset({area(0, 0.0, 7, {1.0})}), doctest::Contains("s2"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(Dataset({area(0, 1.0, 1, {1.0})}), doctest::Contains("n"),
                         ValidationError);
    CHECK_THROWS_AS(Dataset({area(0, 1.0, 7, {1.0}), area(0, 1.0, 7, {1.0, 2.0})}),
                    ValidationError);
    CHECK_THROWS_AS(Dataset({area(std::nan(""), 1.0, 7, {1.0})}), ValidationError);
}

TEST_CASE("t is the product of the hyperparameter and sample-size sign sums") {
    SUBCASE("positive columns give t=1") {
        const auto [data, truth] = test_support::standard_dataset(10, 7);
        const Eigen::VectorXi t = compute_t(data, default_hyperparams(data));
        REQUIRE(t.size() == 1);
        CHECK(t(0) == 1);
    }
    SUBCASE("exact cancellation gives t=0") {
        Dataset data({area(0, 1, 7, {1.0}, {1.0}), area(0, 1, 7, {1.0}, {-1.0})});
        const Eigen::VectorXi t = compute_t(data, default_hyperparams(data));
        CHECK(t(0) == 0);
    }
    SUBCASE("opposite sign sums give t=-1") {
        Dataset data({area(0, 1, 10, {1.0}, {1.0}), area(0, 1, 2, {1.0}, {-1.0})});
        HyperParams hyper;
        hyper.a = Eigen::Vector2d(1.0, 3.0);
        hyper.b = Eigen::Vector2d(0.1, 0.5);
        // sum a_i w_i = -2, sum n_i w_i = 8.
        const Eigen::VectorXi t = compute_t(data, hyper);
        CHECK(t(0) == -1);
    }
    SUBCASE("q=0 gives an empty vector") {
        Dataset data({area(0, 1, 7, {1.0})});
        CHECK(compute_t(data, default_hyperparams(data)).size() == 0);
    }
}

TEST_CASE("the standard study configuration satisfies every condition") {
    const auto [data, truth] = test_support::standard_dataset(30, 7);
    const ConditionReport report =
        check_conditions(data, test_support::make_spec(ModelKind::Stk2, data));
    CHECK(report.proper);
    CHECK(report.finite_variance);
    CHECK(report.violations.empty());
    REQUIRE(report.t.size() == 1);
    CHECK(report.t(0) == 1);
}

TEST_CASE("too few areas violate m>p+2") {
    const auto [data, truth] = test_support::standard_dataset(4, 7);
    const ConditionReport report =
        check_conditions(data, test_support::make_spec(ModelKind::Stk1, data));
    CHECK_FALSE(report.proper);
    CHECK(report.has_violation("m>p+2"));
}

TEST_CASE("m between p+2 and p+6 is proper without finite variances") {
    const auto [data, truth] = test_support::standard_dataset(8, 7);
    const ConditionReport report =
        check_conditions(data, test_support::make_spec(ModelKind::Stk1, data));
    CHECK(report.proper);
    CHECK_FALSE(report.finite_variance);
    CHECK(report.has_violation("m>p+6"));
}

TEST_CASE("a negative t_k is reported for stk2") {
    std::vector<AreaObservation> areas;
    for (int i = 0; i < 10; ++i) {
        const bool first_half = i < 5;
        areas.push_back(area(0.1 * i, 1.0, first_half ? 20 : 2, {1.0},
                             {first_half ? 1.0 : -1.0}));
    }
    Dataset data(std::move(areas));
    HyperParams hyper;
    hyper.a.resize(10);
    hyper.b = Eigen::VectorXd::Constant(10, 0.2);
    for (int i = 0; i < 10; ++i) hyper.a(i) = i < 5 ? 1.0 : 3.0;
    // sum a w = 5 - 15 < 0 while sum n w = 100 - 10 > 0.
    const ConditionReport report = check_conditions(data, {ModelKind::Stk2, hyper});
    CHECK_FALSE(report.proper);
    CHECK(report.has_violation("t_k=1"));
}

TEST_CASE("stk2 without variance covariates is rejected") {
    Dataset data = random_dataset(7, 12, 2, 0);
    const ConditionReport report =
        check_conditions(data, test_support::make_spec(ModelKind::Stk2, data));
    CHECK_FALSE(report.proper);
    CHECK(report.has_violation("q>=1"));
}

TEST_CASE("a duplicated covariate column breaks the rank condition") {
    RandomSource rng(11);
    std::vector<AreaObservation> areas;
    for (int i = 0; i < 12; ++i) {
        const double u = rng.uniform(2.0, 8.0);
        areas.push_back(area(rng.normal(), 1.0, 7, {1.0, u, u}));
    }
    Dataset data(std::move(areas));
    const ConditionReport report =
        check_conditions(data, test_support::make_spec(ModelKind::Stk1, data));
    CHECK_FALSE(report.proper);
    CHECK(report.has_violation("rank(Z)=p"));
}

TEST_CASE("finite variance implies proper") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        RandomSource rng(seed);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.uniform() * 14);
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);
        const Eigen::Index q = static_cast<Eigen::Index>(rng.uniform() * 2);
        if (m <= p) continue;
        Dataset data = random_dataset(seed * 97, m, p, q);
        const ModelKind kind = q > 0 && seed % 2 == 0 ? ModelKind::Stk2 : ModelKind::Stk1;
        const ConditionReport report =
            check_conditions(data, test_support::make_spec(kind, data));
        if (report.finite_variance) {
            CHECK(report.proper);
        }
    }
}

TEST_CASE("the report is invariant to area ordering") {
    Dataset data = random_dataset(21, 14, 2, 1);
    std::vector<AreaObservation> shuffled = data.areas();
    std::mt19937 gen(3);
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    Dataset permuted(std::move(shuffled));

    for (ModelKind kind : {ModelKind::Stk1, ModelKind::Stk2}) {
        const ConditionReport a = check_conditions(data, test_support::make_spec(kind, data));
        const ConditionReport b =
            check_conditions(permuted, test_support::make_spec(kind, permuted));
        CHECK(a.proper == b.proper);
        CHECK(a.finite_variance == b.finite_variance);
        CHECK(a.violations.size() == b.violations.size());
        if (kind == ModelKind::Stk2) {
            CHECK(a.t == b.t);
        }
    }
}

TEST_CASE("t is invariant to positive rescaling of a w column") {
    Dataset data = random_dataset(31, 9, 2, 2);
    const HyperParams hyper = default_hyperparams(data);
    const Eigen::VectorXi before = compute_t(data, hyper);

    std::vector<AreaObservation> scaled = data.areas();
    for (AreaObservation& a : scaled) a.w(1) *= 37.5;
    const Eigen::VectorXi after = compute_t(Dataset(std::move(scaled)), hyper);
    CHECK(before == after);
}

TEST_CASE("a constant w column is rejected as unidentifiable") {
    std::vector<AreaObservation> areas;
    for (int i = 0; i < 10; ++i) {
        areas.push_back(area(0.5 * i, 1.0, 7, {1.0, 0.1 * i}, {1.0}));
    }
    Dataset data(std::move(areas));
    CHECK_THROWS_WITH_AS(validate_variance_covariates(data), doctest::Contains("constant"),
                         ValidationError);
}

TEST_CASE("model kind names round trip") {
    for (ModelKind kind : {ModelKind::Stk1, ModelKind::Stk2, ModelKind::Yc}) {
        CHECK(model_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(model_kind_from_string("other"), ValidationError);
}

TEST_SUITE_END();
