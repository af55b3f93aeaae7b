#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <vector>

#include "ncorb/morita.hpp"

using namespace ncorb;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpectralTripleData reflection_triple(int n, HaarConvention haar) {
    GroupoidPtr gpd = make_groupoid(GroupAction::reflection_cycle(n), haar);
    GraphPtr graph = std::make_shared<const MetricGraph>(refine_circle(n, 2.0 * kPi));
    auto bundle = std::make_shared<const SpinorBundle>(SpinorBundle::parity_swap(gpd));
    // The parity swap flips chirality, so the graded structure is dropped.
    return SpectralTripleData(gpd, bundle, drop_grading(circle_dirac(graph, 2)));
}

}  // namespace

TEST_CASE("reflexive instances pass the full comparison") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        GroupoidPtr gpd = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        GraphPtr graph =
            std::make_shared<const MetricGraph>(refine_circle(6, 2.0 * kPi));
        auto bundle = std::make_shared<const SpinorBundle>(SpinorBundle::trivial(gpd, 1));
        SpectralTripleData t(gpd, bundle, circle_dirac(graph, 1));
        MoritaReport rep = full_report(reflexive_instance(t), 40, 2, 1e-10);
        INFO(rep.failure);
        CHECK(rep.passed);
        CHECK(std::abs(rep.m5.scale - 1.0) <= 1e-12);
        CHECK(rep.smoothness.smooth);

        MoritaReport refl = full_report(reflexive_instance(reflection_triple(16, haar)),
                                        40, 2, 1e-10);
        INFO(refl.failure);
        CHECK(refl.passed);
        CHECK(std::abs(refl.m5.scale - 1.0) <= 1e-12);
        CHECK(!refl.smoothness.smooth);
        CHECK(!refl.m4.right.used_fallback);
    }
}

TEST_CASE("the rotation quotient passes the full comparison") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        MoritaReport rep = full_report(inst, 60, 1, 1e-10);
        INFO(rep.failure);
        CHECK(rep.passed);
        CHECK(std::abs(rep.m5.scale - std::sqrt(2.0)) <= 1e-10);
        CHECK(rep.m3.constant_defect <= 1e-12);
        CHECK(rep.m1.span_dim_theta == 12);
        CHECK(rep.m1.span_dim_xi == 3);
        CHECK(rep.smoothness.smooth);
        CHECK(rep.smoothness.singular_vertices.empty());
    }
}

TEST_CASE("the graded rank two quotient passes with a genuine dimension fit") {
    MoritaInstance inst = rotation_quotient_instance(32, 2, HaarConvention::Counting);
    REQUIRE(inst.right_triple.has_grading());
    REQUIRE(inst.left_triple.has_grading());
    MoritaReport rep = full_report(inst, 40, 3, 1e-10);
    INFO(rep.failure);
    CHECK(rep.passed);
    CHECK(!rep.m4.right.used_fallback);
    CHECK(!rep.m4.left.used_fallback);
    CHECK(std::abs(rep.m4.right.fitted - 1.0) <= 0.2);
    CHECK(std::abs(rep.m4.left.fitted - 1.0) <= 0.2);
}

TEST_CASE("the dimension fit counts honestly and falls back when starved") {
    GraphPtr small = std::make_shared<const MetricGraph>(refine_circle(6, 2.0 * kPi));
    M4Side starved = weyl_dimension(circle_dirac(small, 1), 1);
    CHECK(starved.used_fallback);
    CHECK(starved.eigenvalue_count == 6);
    CHECK(starved.fitted == 1.0);

    GraphPtr big = std::make_shared<const MetricGraph>(refine_circle(64, 2.0 * kPi));
    M4Side fitted = weyl_dimension(circle_dirac(big, 1), 1);
    CHECK(!fitted.used_fallback);
    CHECK(fitted.eigenvalue_count == 64);
    CHECK(std::abs(fitted.fitted - 1.0) <= 0.2);
}

TEST_CASE("the dimension fit sees two on a product spectrum") {
    // Kronecker pairs of two circle branches: lambda_{jk} = +-sqrt(s_j^2 + s_k^2),
    // the eigenvalue pattern of a flat two torus.
    const int n = 24;
    const double h = 2.0 * kPi / n;
    std::vector<double> s(n);
    for (int j = 0; j < n; ++j) s[j] = 2.0 * std::sin(kPi * j / n) / h;
    RealVector evals(2 * n * n);
    int at = 0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double lam = std::sqrt(s[j] * s[j] + s[k] * s[k]);
            evals(at++) = lam;
            evals(at++) = -lam;
        }
    M4Side side = weyl_fit(evals, 2);
    CHECK(!side.used_fallback);
    CHECK(side.eigenvalue_count == 2 * n * n);
    CHECK(std::abs(side.fitted - 2.0) <= 0.2);
}

TEST_CASE("a tampered left Dirac is caught by the unitary and invariant checks") {
    MoritaInstance inst = rotation_quotient_instance(6, 1, HaarConvention::Counting);
    const SpectralTripleData& left = inst.left_triple;
    DiracOperator doubled(left.dirac().graph(), left.dirac().rank(),
                          2.0 * left.dirac().matrix(), left.dirac().nu(),
                          left.dirac().grading());
    SpectralTripleData bad_left(left.groupoid(), left.bundle_ptr(), std::move(doubled),
                                left.declared_dimension());
    MoritaInstance bad{inst.right_triple, std::move(bad_left), inst.bitorsor,
                       inst.q_graph};

    M2Report m2 = check_m2(bad);
    CHECK(!m2.passed);
    CHECK(m2.dirac > 1e-6);
    M5Report m5 = check_m5(bad);
    CHECK(!m5.passed);
    CHECK(m5.dirac > 1e-6);
    // The bitorsor and the right triple are untouched, so the other
    // conditions still hold: the failure is localized.
    CHECK(check_m1(bad, 30, 1, 1e-10).passed);
    CHECK(check_m3(bad).passed);
    MoritaReport rep = full_report(bad, 30, 1, 1e-10);
    CHECK(!rep.passed);
    CHECK(!rep.failure.empty());
}

TEST_CASE("the commutation defect stays bounded across refinement") {
    M3FamilyReport fam = check_m3_family({16, 32}, 2, HaarConvention::Counting);
    INFO(fam.failure);
    CHECK(fam.passed);
    REQUIRE(fam.reports.size() == 2);
    REQUIRE(fam.defect_ratios.size() == 1);
    REQUIRE(fam.norm_ratios.size() == 1);
    CHECK(fam.defect_ratios[0] <= 1.1);
    CHECK(std::abs(fam.norm_ratios[0] - 2.0) <= 1e-9);
    for (const M3Report& r : fam.reports) {
        CHECK(r.passed);
        CHECK(r.constant_defect <= 1e-12);
        CHECK(r.adjoint_gap <= 1e-10);
    }
}

TEST_CASE("smoothness verdicts follow the freeness of the action") {
    SmoothnessVerdict rot = smoothness_verdict(GroupAction::rotation_cycle(6, 2));
    CHECK(rot.smooth);
    CHECK(rot.singular_vertices.empty());

    SmoothnessVerdict refl = smoothness_verdict(GroupAction::reflection_cycle(6));
    CHECK(!refl.smooth);
    CHECK(refl.singular_vertices == std::vector<int>{0, 3});

    SmoothnessVerdict s3 = smoothness_verdict(GroupAction::s3_on_c6());
    CHECK(!s3.smooth);
    CHECK(!s3.singular_vertices.empty());
}
