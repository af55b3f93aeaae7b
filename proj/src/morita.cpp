#include "ncorb/morita.hpp"

#include "ncorb/orbifold.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ncorb {

namespace {

void check_instance(const MoritaInstance& inst) {
    if (inst.bitorsor->right_groupoid() != inst.right_triple.groupoid())
        throw ContractError("the bitorsor's right groupoid is not the right triple's groupoid");
    if (inst.bitorsor->left_groupoid() != inst.left_triple.groupoid())
        throw ContractError("the bitorsor's left groupoid is not the left triple's groupoid");
    if (inst.left_triple.bundle().rank() != inst.right_triple.bundle().rank())
        throw ContractError("the two triples must carry bundles of equal rank");
}

/// Phase d (1 + d^2)^{-1/2} of a plain hermitian matrix.
Matrix plain_phase(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((hermitian + hermitian.adjoint()) / 2.0);
    RealVector lam = es.eigenvalues();
    RealVector phased(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        phased(i) = lam(i) / std::sqrt(1.0 + lam(i) * lam(i));
    return es.eigenvectors() * phased.asDiagonal() * es.eigenvectors().adjoint();
}

/// The shared machinery of conditions 2 and 3: the induced space, the chi
/// map on orthonormal coordinates, and the pulled-back Dirac compressed to
/// the induced space.
struct InducedDiracData {
    InducedHilbert h;
    double scale;      // w_Theta / w_Xi
    Matrix chi_map;    // Q sections x induced dim
    RealVector q_weights;
    Matrix d_q;        // pulled-back ambient Dirac on Q sections
    Matrix d_induced;  // its compression, on orthonormal induced coordinates
};

InducedDiracData build_induced_dirac(const MoritaInstance& inst) {
    InducedDiracData d{induced_space(inst.bitorsor, inst.right_triple.bundle_ptr(),
                                     inst.right_triple.dirac().nu()),
                       0.0, {}, {}, {}, {}};
    d.scale = inst.right_triple.groupoid()->weight() / inst.left_triple.groupoid()->weight();
    d.chi_map = chi(d.h) * d.h.pi_plus;
    d.q_weights = q_section_weights(d.h);
    d.d_q = pullback_operator(d.h, inst.q_graph, inst.right_triple.dirac().matrix());
    d.d_induced =
        (d.chi_map.adjoint() * d.q_weights.asDiagonal() * (d.d_q * d.chi_map)) / d.scale;
    return d;
}

}  // namespace

MoritaInstance quotient_instance(const SpectralTripleData& t) {
    auto bitorsor = std::make_shared<const MoritaBitorsor>(quotient_bitorsor(t.groupoid()));
    DiscreteOrbifold orb(*t.dirac().graph(), t.groupoid()->action());
    auto y_graph = std::make_shared<const MetricGraph>(orb.quotient_graph());
    if (!is_uniform_cycle(*y_graph))
        throw ContractError("the quotient graph is not a uniform circle; there is no "
                            "canonical comparison triple");
    auto xi = bitorsor->left_groupoid();
    const int rank = t.bundle().rank();
    auto base_bundle = std::make_shared<const SpinorBundle>(SpinorBundle::trivial(xi, rank));
    SpectralTripleData left(xi, base_bundle, circle_dirac(y_graph, rank),
                            t.declared_dimension());
    if (t.has_grading() != left.has_grading())
        throw ContractError("the canonical quotient triple does not match the ambient "
                            "grading structure");
    CoveringGraph q_graph = lift_graph(*bitorsor, *t.dirac().graph(), *y_graph);
    return MoritaInstance{t, std::move(left), std::move(bitorsor), std::move(q_graph)};
}

MoritaInstance rotation_quotient_instance(int n, int rank, HaarConvention haar) {
    if (n < 6 || n % 2 != 0)
        throw StructuralError("rotation quotient needs an even ambient size of at least 6");
    constexpr double tau = 2.0 * std::numbers::pi_v<double>;
    auto x_graph = std::make_shared<const MetricGraph>(refine_circle(n, tau));
    auto theta = make_groupoid(GroupAction::rotation_cycle(n, 2), haar);
    auto ambient_bundle = std::make_shared<const SpinorBundle>(SpinorBundle::trivial(theta, rank));
    return quotient_instance(
        SpectralTripleData(theta, ambient_bundle, circle_dirac(x_graph, rank), 1));
}

MoritaInstance reflexive_instance(const SpectralTripleData& t) {
    auto bitorsor = std::make_shared<const MoritaBitorsor>(identity_bitorsor(t.groupoid()));
    const MetricGraph& g = *t.dirac().graph();
    CoveringGraph q_graph = lift_graph(*bitorsor, g, g);
    return MoritaInstance{t, t, std::move(bitorsor), std::move(q_graph)};
}

ImprimitivityReport check_m1(const MoritaInstance& inst, int samples, unsigned seed,
                             double tolerance) {
    check_instance(inst);
    return check_imprimitivity(inst.bitorsor, samples, seed, tolerance);
}

M2Report check_m2(const MoritaInstance& inst, double tolerance) {
    check_instance(inst);
    const auto& b = *inst.bitorsor;
    const auto& t2 = inst.left_triple;
    const auto& xi = *t2.groupoid();
    M2Report rep;

    InducedDiracData d = build_induced_dirac(inst);
    const int r = d.h.rank;
    rep.induced_dim = d.h.dim;
    if (d.h.dim != xi.points() * r) {
        std::ostringstream msg;
        msg << "induced dimension " << d.h.dim << " differs from the left section dimension "
            << xi.points() * r;
        rep.failure = msg.str();
        return rep;
    }

    Matrix u2 = Matrix::Zero(d.h.dim, d.h.dim);
    for (int y = 0; y < xi.points(); ++y)
        u2.block(y * r, 0, r, d.h.dim) = d.chi_map.block(b.q_star(y) * r, 0, r, d.h.dim);
    u2 /= std::sqrt(d.scale);

    RealVector wy = t2.weights();
    RealVector ones = RealVector::Ones(d.h.dim);
    rep.unitarity = operator_norm(u2.adjoint() * wy.asDiagonal() * u2 -
                                  Matrix::Identity(d.h.dim, d.h.dim));

    for (int a = 0; a < xi.arrows(); ++a) {
        AlgebraElement delta =
            delta_element(t2.groupoid(), xi.arrow_group(a), xi.arrow_point(a));
        DescendedOp act = induced_left_action(d.h, delta);
        rep.null_residual = std::max(rep.null_residual, act.null_residual);
        rep.algebra = std::max(
            rep.algebra, weighted_operator_norm(u2 * act.op - t2.rep(delta) * u2, wy, ones));
    }

    rep.dirac =
        weighted_operator_norm(u2 * d.d_induced - t2.dirac().matrix() * u2, wy, ones);
    Matrix proj = (d.chi_map * d.chi_map.adjoint() * d.q_weights.asDiagonal()) / d.scale;
    rep.subspace_leak = weighted_operator_norm(d.d_q * proj - proj * (d.d_q * proj),
                                               d.q_weights, d.q_weights);

    const bool right_graded = inst.right_triple.has_grading();
    if (right_graded != t2.has_grading()) {
        rep.failure = "grading present on one side only";
        return rep;
    }
    if (right_graded) {
        Matrix omega_q = pullback_operator(d.h, inst.q_graph, inst.right_triple.grading());
        Matrix omega_ind =
            (d.chi_map.adjoint() * d.q_weights.asDiagonal() * (omega_q * d.chi_map)) / d.scale;
        rep.grading = weighted_operator_norm(u2 * omega_ind - t2.grading() * u2, wy, ones);
    }

    struct Item {
        const char* name;
        double value;
    };
    for (Item item : {Item{"unitarity", rep.unitarity}, Item{"algebra", rep.algebra},
                      Item{"dirac", rep.dirac}, Item{"grading", rep.grading},
                      Item{"null residual", rep.null_residual},
                      Item{"subspace leak", rep.subspace_leak}}) {
        if (item.value > tolerance) {
            std::ostringstream msg;
            msg << item.name << " residual " << item.value << " exceeds " << tolerance;
            rep.failure = msg.str();
            return rep;
        }
    }
    rep.passed = true;
    return rep;
}

M3Report check_m3(const MoritaInstance& inst, double tolerance) {
    check_instance(inst);
    M3Report rep;
    InducedDiracData d = build_induced_dirac(inst);

    Matrix f1 = approximate_sign(inst.right_triple.dirac());
    Matrix f2 = plain_phase(d.d_induced);
    RealVector wx = inst.right_triple.weights();
    RealVector ones = RealVector::Ones(d.h.dim);

    auto defect_pair = [&](const BimoduleElement& u) {
        Matrix tu = t_u(d.h, u);
        Matrix ta = t_u_adjoint(d.h, u);
        double forward = weighted_operator_norm(tu * f1 - f2 * tu, ones, wx);
        double backward = weighted_operator_norm(ta * f2 - f1 * ta, wx, ones);
        rep.adjoint_gap = std::max(rep.adjoint_gap, std::abs(forward - backward));
        return forward;
    };

    for (int q = 0; q < inst.bitorsor->q_count(); ++q)
        rep.max_defect = std::max(rep.max_defect, defect_pair(delta_section(inst.bitorsor, q)));
    BimoduleElement constant(inst.bitorsor, Vector::Ones(inst.bitorsor->q_count()));
    rep.constant_defect = defect_pair(constant);
    rep.max_defect = std::max(rep.max_defect, rep.constant_defect);

    rep.dirac_norm = weighted_operator_norm(inst.right_triple.dirac().matrix(), wx, wx);

    if (rep.constant_defect > tolerance) {
        std::ostringstream msg;
        msg << "invariant creation element has defect " << rep.constant_defect;
        rep.failure = msg.str();
    } else if (rep.adjoint_gap > tolerance) {
        std::ostringstream msg;
        msg << "the two defect directions disagree by " << rep.adjoint_gap;
        rep.failure = msg.str();
    } else {
        rep.passed = true;
    }
    return rep;
}

M3FamilyReport check_m3_family(const std::vector<int>& sizes, int rank, HaarConvention haar,
                               double ratio_bound, double tolerance) {
    if (sizes.size() < 2) throw StructuralError("the refinement family needs at least two sizes");
    for (size_t i = 0; i + 1 < sizes.size(); ++i)
        if (sizes[i + 1] != 2 * sizes[i])
            throw StructuralError("the refinement family must double at each step");

    M3FamilyReport rep;
    rep.sizes = sizes;
    for (int n : sizes)
        rep.reports.push_back(check_m3(rotation_quotient_instance(n, rank, haar), tolerance));

    rep.passed = true;
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        const auto& coarse = rep.reports[i];
        const auto& fine = rep.reports[i + 1];
        rep.defect_ratios.push_back(fine.max_defect / coarse.max_defect);
        rep.norm_ratios.push_back(fine.dirac_norm / coarse.dirac_norm);
    }
    for (size_t i = 0; i < rep.reports.size(); ++i) {
        if (!rep.reports[i].passed) {
            std::ostringstream msg;
            msg << "size " << sizes[i] << ": " << rep.reports[i].failure;
            rep.failure = msg.str();
            rep.passed = false;
            return rep;
        }
    }
    for (size_t i = 0; i < rep.defect_ratios.size(); ++i) {
        if (rep.defect_ratios[i] > ratio_bound) {
            std::ostringstream msg;
            msg << "defect grew by " << rep.defect_ratios[i] << " from size " << sizes[i];
            rep.failure = msg.str();
            rep.passed = false;
            return rep;
        }
        if (std::abs(rep.norm_ratios[i] - 2.0) > 1e-9) {
            std::ostringstream msg;
            msg << "Dirac norm ratio " << rep.norm_ratios[i] << " from size " << sizes[i]
                << " is not 2";
            rep.failure = msg.str();
            rep.passed = false;
            return rep;
        }
    }
    return rep;
}

M4Side weyl_fit(const RealVector& eigenvalues, int declared) {
    M4Side side;
    side.declared = declared;
    side.eigenvalue_count = static_cast<int>(eigenvalues.size());
    std::vector<double> magnitudes;
    magnitudes.reserve(static_cast<size_t>(eigenvalues.size()));
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        magnitudes.push_back(std::abs(eigenvalues(i)));
    std::sort(magnitudes.begin(), magnitudes.end());
    double radius = magnitudes.empty() ? 0.0 : magnitudes.back();
    if (side.eigenvalue_count < 8 || radius <= 0.0) {
        side.used_fallback = true;
        side.fitted = declared;
        return side;
    }

    std::vector<double> xs, ys;
    for (int k = 0; k < 12; ++k) {
        double threshold = (0.1 + 0.5 * k / 11.0) * radius;
        auto count = std::upper_bound(magnitudes.begin(), magnitudes.end(), threshold) -
                     magnitudes.begin();
        if (count < 1) continue;
        xs.push_back(std::log(threshold));
        ys.push_back(std::log(static_cast<double>(count)));
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double cov = 0.0, var = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        var += (xs[i] - mx) * (xs[i] - mx);
    }
    side.fitted = cov / var;
    return side;
}

M4Side weyl_dimension(const DiracOperator& d, int declared) {
    return weyl_fit(spectrum(d), declared);
}

M4Report check_m4(const MoritaInstance& inst, double tolerance) {
    check_instance(inst);
    M4Report rep;
    rep.right = weyl_dimension(inst.right_triple.dirac(), inst.right_triple.declared_dimension());
    rep.left = weyl_dimension(inst.left_triple.dirac(), inst.left_triple.declared_dimension());
    if (rep.right.declared != rep.left.declared) {
        rep.failure = "declared dimensions differ";
        return rep;
    }
    for (const auto& [side, name] :
         {std::pair<const M4Side&, const char*>{rep.right, "right"}, {rep.left, "left"}}) {
        if (std::abs(side.fitted - side.declared) > tolerance) {
            std::ostringstream msg;
            msg << name << " side fitted dimension " << side.fitted << " is not within "
                << tolerance << " of " << side.declared;
            rep.failure = msg.str();
            return rep;
        }
    }
    rep.passed = true;
    return rep;
}

SmoothnessVerdict smoothness_verdict(const GroupAction& action) {
    SmoothnessVerdict v;
    for (int x = 0; x < action.points(); ++x)
        if (action.stabilizer(x).size() > 1) v.singular_vertices.push_back(x);
    v.smooth = v.singular_vertices.empty();
    return v;
}

M5Report check_m5(const MoritaInstance& inst, double tolerance) {
    check_instance(inst);
    const auto& b = *inst.bitorsor;
    const auto& t1 = inst.right_triple;
    const auto& t2 = inst.left_triple;
    M5Report rep;

    InducedHilbert h =
        induced_space(inst.bitorsor, t1.bundle_ptr(), t1.dirac().nu());
    PushforwardBundle pf = pushforward_bundle(h);
    rep.weights_gap = (pf.nu_sharp - t2.dirac().nu()).cwiseAbs().maxCoeff();

    InvariantTriple inv = invariant_triple(t1);
    RealVector wy = t2.weights();
    UPhiResult up = u_phi(h, inv, wy);
    rep.scale = up.scale;
    rep.isometry = up.isometry_residual;
    rep.surjective = inv.dim() == static_cast<int>(wy.size());

    RealVector ones = RealVector::Ones(inv.dim());
    const auto orbit_of = t1.groupoid()->action().orbit_index();
    const int y_count = t2.groupoid()->points();
    for (size_t k = 0; k < inv.algebra.size(); ++k) {
        Vector vals = Vector::Zero(y_count);
        for (int y = 0; y < y_count; ++y)
            if (orbit_of[static_cast<size_t>(b.rho(b.q_star(y)))] == static_cast<int>(k))
                vals(y) = 1.0;
        Matrix downstairs = t2.rep(embed_point_function(t2.groupoid(), vals));
        rep.algebra = std::max(
            rep.algebra,
            weighted_operator_norm(up.map * inv.algebra[k] - downstairs * up.map, wy, ones));
    }

    rep.dirac = weighted_operator_norm(up.map * inv.dirac - t2.dirac().matrix() * up.map,
                                       wy, ones);

    const bool inv_graded = inv.grading.has_value();
    if (inv_graded != t2.has_grading()) {
        rep.failure = "grading present on one side only";
        return rep;
    }
    if (inv_graded)
        rep.grading = weighted_operator_norm(up.map * *inv.grading - t2.grading() * up.map,
                                             wy, ones);

    struct Item {
        const char* name;
        double value;
    };
    for (Item item : {Item{"isometry", rep.isometry}, Item{"algebra", rep.algebra},
                      Item{"dirac", rep.dirac}, Item{"grading", rep.grading},
                      Item{"volume", rep.weights_gap}}) {
        if (item.value > tolerance) {
            std::ostringstream msg;
            msg << item.name << " residual " << item.value << " exceeds " << tolerance;
            rep.failure = msg.str();
            return rep;
        }
    }
    rep.passed = true;
    return rep;
}

MoritaReport full_report(const MoritaInstance& inst, int samples, unsigned seed,
                         double tolerance) {
    MoritaReport rep;
    rep.m1 = check_m1(inst, samples, seed, tolerance);
    rep.m2 = check_m2(inst, tolerance);
    rep.m3 = check_m3(inst, tolerance);
    rep.m4 = check_m4(inst);
    rep.m5 = check_m5(inst, tolerance);
    rep.smoothness = smoothness_verdict(inst.right_triple.groupoid()->action());
    rep.passed = rep.m1.passed && rep.m2.passed && rep.m3.passed && rep.m4.passed &&
                 rep.m5.passed;
    if (!rep.m1.passed)
        rep.failure = "m1: " + rep.m1.failure;
    else if (!rep.m2.passed)
        rep.failure = "m2: " + rep.m2.failure;
    else if (!rep.m3.passed)
        rep.failure = "m3: " + rep.m3.failure;
    else if (!rep.m4.passed)
        rep.failure = "m4: " + rep.m4.failure;
    else if (!rep.m5.passed)
        rep.failure = "m5: " + rep.m5.failure;
    return rep;
}

}  // namespace ncorb
