#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "ncorb/induction.hpp"
#include "ncorb/morita.hpp"

using namespace ncorb;

namespace {

InducedHilbert quotient_space(const MoritaInstance& inst) {
    return induced_space(inst.bitorsor, inst.right_triple.bundle_ptr(),
                         inst.right_triple.dirac().nu());
}

BimoduleElement random_section(const BitorsorPtr& b, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    Vector v(b->q_count());
    for (int q = 0; q < b->q_count(); ++q) v(q) = Complex(nd(rng), nd(rng));
    return BimoduleElement(b, std::move(v));
}

AlgebraElement random_element(const GroupoidPtr& gpd, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    Vector v(gpd->arrows());
    for (int i = 0; i < gpd->arrows(); ++i) v(i) = Complex(nd(rng), nd(rng));
    return AlgebraElement(gpd, std::move(v));
}

double mdiff(const Matrix& a, const Matrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("the quotient induction has the quotient dimension and a clean gram") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        CHECK(h.dim == 3);
        CHECK(h.rank == 1);
        CHECK(mdiff(h.gram, h.gram.adjoint()) <= 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.gram);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        // pi maps onto orthonormal coordinates, pi_plus is its right inverse
        // and carries the orthonormal product back to the gram.
        Matrix id = Matrix::Identity(h.dim, h.dim);
        CHECK(mdiff(h.pi * h.pi_plus, id) <= 1e-12);
        CHECK(mdiff(h.pi_plus.adjoint() * h.gram * h.pi_plus, id) <= 1e-12);
    }
}

TEST_CASE("inducing through the identity bitorsor recovers the ambient space") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        GroupoidPtr gpd = make_groupoid(GroupAction::reflection_cycle(6), haar);
        auto b = std::make_shared<const MoritaBitorsor>(identity_bitorsor(gpd));
        GraphPtr graph = std::make_shared<const MetricGraph>(
            refine_circle(6, 2.0 * std::acos(-1.0)));
        auto bundle =
            std::make_shared<const SpinorBundle>(SpinorBundle::parity_swap(gpd));
        InducedHilbert h = induced_space(b, bundle, default_volume(*graph));
        CHECK(h.dim == bundle->section_dim());
        ChiIso iso = chi_iso(h, 40, 11);
        CHECK(iso.rank == h.dim);
        CHECK(iso.null_residual <= 1e-10);
        CHECK(iso.ratio_deviation <= 1e-10);
        // Same groupoid on both sides, so the scale is exactly one.
        CHECK(std::abs(iso.measured_scale - 1.0) <= 1e-10);
    }
}

TEST_CASE("creation maps satisfy the reconstruction identity") {
    std::mt19937 rng(17);
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        for (int trial = 0; trial < 8; ++trial) {
            BimoduleElement u = random_section(h.bitorsor, rng);
            BimoduleElement v = random_section(h.bitorsor, rng);
            Matrix pairing_rep = crossed_rep_matrix(pairing_theta(u, v), *h.bundle);
            // T_u^dagger T_v represents the Theta pairing, with the ambient
            // weight appearing only in the plain-adjoint form.
            CHECK(mdiff(t_u_adjoint(h, u) * t_u(h, v), pairing_rep) <= 1e-12);
            CHECK(mdiff(t_u(h, u).adjoint() * t_u(h, v),
                        h.ambient_weights.cast<Complex>().asDiagonal() * pairing_rep) <=
                  1e-12);
        }
    }
}

TEST_CASE("creation maps intertwine both module actions") {
    std::mt19937 rng(19);
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        for (int trial = 0; trial < 8; ++trial) {
            BimoduleElement u = random_section(h.bitorsor, rng);
            AlgebraElement a = random_element(h.bitorsor->right_groupoid(), rng);
            AlgebraElement b = random_element(h.bitorsor->left_groupoid(), rng);
            // u . a lands as composition with the crossed representation.
            CHECK(mdiff(t_u(h, right_action(u, a)),
                        t_u(h, u) * crossed_rep_matrix(a, *h.bundle)) <= 1e-12);
            // b . u lands as the descended left action.
            DescendedOp left = induced_left_action(h, b);
            CHECK(left.null_residual <= 1e-12);
            CHECK(mdiff(t_u(h, left_action(b, u)), left.op * t_u(h, u)) <= 1e-12);
        }
    }
}

TEST_CASE("chi is a scaled isometry that intertwines the left actions") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        ChiIso iso = chi_iso(h, 60, 23);
        CHECK(iso.rank == h.dim);
        CHECK(iso.null_residual <= 1e-10);
        CHECK(iso.intertwining_residual <= 1e-10);
        CHECK(iso.ratio_deviation <= 1e-10);
        double expected = haar == HaarConvention::Counting ? 1.0 : 0.5;
        CHECK(std::abs(iso.predicted_scale - expected) <= 1e-12);
        CHECK(std::abs(iso.measured_scale - expected) <= 1e-10);
    }
}

TEST_CASE("the induced Dirac operator is the quotient circle operator") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        InducedDiracResult res = induced_dirac(h, inst.q_graph,
                                               inst.right_triple.dirac(),
                                               inst.left_triple.dirac().graph());
        CHECK(res.subspace_residual <= 1e-10);
        CHECK(mdiff(res.op.matrix(), inst.left_triple.dirac().matrix()) <= 1e-12);
        CHECK((res.op.nu() - inst.left_triple.dirac().nu()).cwiseAbs().maxCoeff() <=
              1e-12);
    }
}

TEST_CASE("the induced grading descends fiberwise") {
    MoritaInstance inst = rotation_quotient_instance(6, 2, HaarConvention::Counting);
    InducedHilbert h = quotient_space(inst);
    REQUIRE(inst.right_triple.has_grading());
    REQUIRE(inst.left_triple.has_grading());
    Matrix down = induced_grading(h, inst.right_triple.grading());
    CHECK(mdiff(down, inst.left_triple.grading()) <= 1e-12);
}

TEST_CASE("u_phi carries the invariant triple with the square root scale") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = quotient_space(inst);
        InvariantTriple inv = invariant_triple(inst.right_triple);
        CHECK(inv.dim() == 3);
        UPhiResult up = u_phi(h, inv, inst.left_triple.weights());
        CHECK(std::abs(up.scale - std::sqrt(2.0)) <= 1e-12);
        CHECK(up.isometry_residual <= 1e-10);
        CHECK(up.map.rows() == inst.left_triple.dim());
        CHECK(up.map.cols() == inv.dim());
    }
}

TEST_CASE("the commutator defect vanishes for constants and scales linearly") {
    GraphPtr graph =
        std::make_shared<const MetricGraph>(refine_circle(8, 2.0 * std::acos(-1.0)));
    DiracOperator d = circle_dirac(graph, 1);
    std::mt19937 rng(29);
    std::normal_distribution<double> nd;
    Vector psi(d.dim());
    for (int i = 0; i < d.dim(); ++i) psi(i) = Complex(nd(rng), nd(rng));
    RealVector constant = RealVector::Constant(graph->vertex_count(), 2.5);
    CHECK(prop5_defect(d, constant, psi) == 0.0);
    RealVector f(graph->vertex_count());
    for (int i = 0; i < graph->vertex_count(); ++i) f(i) = nd(rng);
    double base = prop5_defect(d, f, psi);
    CHECK(prop5_defect(d, RealVector(3.0 * f), psi) ==
          doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("the first order defect halves under mesh refinement") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        Prop5Report rep = verify_prop5({16, 32}, haar, 3);
        CHECK(rep.constant_residual == 0.0);
        REQUIRE(rep.tent_defects.size() == 2);
        REQUIRE(rep.tent_ratios.size() == 1);
        CHECK(rep.tent_defects[0] > 0.0);
        CHECK(rep.ratios_in_band);
        CHECK(rep.tent_ratios[0] >= 0.3);
        CHECK(rep.tent_ratios[0] <= 0.7);
        for (double r : rep.random_defects) CHECK(std::isfinite(r));
    }
}
