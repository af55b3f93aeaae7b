#pragma once

#include <string>
#include <vector>

#include "ncorb/bimodule.hpp"
#include "ncorb/bitorsor.hpp"
#include "ncorb/dirac.hpp"
#include "ncorb/induction.hpp"

namespace ncorb {

/// Everything a Morita comparison needs: the triple on the right base, the
/// candidate equivalent triple on the left base, the bitorsor connecting
/// their groupoids, and the lifted graph on the torsor space.
struct MoritaInstance {
    SpectralTripleData right_triple;  // over Theta
    SpectralTripleData left_triple;   // over Xi
    BitorsorPtr bitorsor;             // left groupoid Xi, right groupoid Theta
    CoveringGraph q_graph;
};

/// A free-action triple compared with the canonical triple on its orbit
/// circle: quotient bitorsor, trivial bundle of the same rank downstairs,
/// circle Dirac on the quotient graph.  Requires the quotient graph to be a
/// uniform cycle.
MoritaInstance quotient_instance(const SpectralTripleData& t);

/// The rotation family: ambient circle of n vertices (circumference 2 pi)
/// with the half-turn Z/2 action, trivial rank-r bundle and circle Dirac;
/// downstairs the circle of n/2 vertices (circumference pi) over the trivial
/// groupoid, joined by the quotient bitorsor.  n must be even and >= 6.
MoritaInstance rotation_quotient_instance(int n, int rank, HaarConvention haar);

/// Every triple compared with itself through the identity bitorsor.
MoritaInstance reflexive_instance(const SpectralTripleData& t);

/// Condition 1, the imprimitivity bimodule axioms; delegates to
/// check_imprimitivity on the instance's bitorsor.
ImprimitivityReport check_m1(const MoritaInstance& inst, int samples, unsigned seed,
                             double tolerance);

struct M2Report {
    double unitarity = 0.0;  // ||U* W_Y U - 1|| for the candidate unitary
    double algebra = 0.0;    // worst intertwining defect over the Xi arrow deltas
    double dirac = 0.0;      // || U D_ind - D_2 U ||
    double grading = 0.0;
    double null_residual = 0.0;   // left action must preserve the gram null space
    double subspace_leak = 0.0;   // pulled-back Dirac leaking off the image of chi
    int induced_dim = 0;
    bool passed = false;
    std::string failure;
};

/// Condition 2, unitary equivalence of the induced triple with the left
/// triple: the candidate unitary is evaluation of the balanced tensors at
/// the canonical section, scaled by the chi isometry constant.
M2Report check_m2(const MoritaInstance& inst, double tolerance = 1e-10);

struct M3Report {
    double max_defect = 0.0;       // worst phase commutation defect over the spanning set
    double constant_defect = 0.0;  // invariant creation element; must vanish
    double adjoint_gap = 0.0;      // both defect directions must agree
    double dirac_norm = 0.0;       // weighted norm of the right Dirac
    bool passed = false;
    std::string failure;
};

/// Condition 3, bounded commutation of the Dirac phases with the creation
/// maps of the spanning set (the arrow deltas plus the constant section).
M3Report check_m3(const MoritaInstance& inst, double tolerance = 1e-10);

struct M3FamilyReport {
    std::vector<int> sizes;
    std::vector<M3Report> reports;
    std::vector<double> defect_ratios;  // defect(2n) / defect(n)
    std::vector<double> norm_ratios;    // ||D(2n)|| / ||D(n)||, exactly 2
    bool passed = false;
    std::string failure;
};

/// Condition 3 across a refinement family of rotation quotients: the defect
/// must not grow by more than ratio_bound per doubling while the Dirac norm
/// doubles.
M3FamilyReport check_m3_family(const std::vector<int>& sizes, int rank,
                               HaarConvention haar, double ratio_bound = 1.1,
                               double tolerance = 1e-10);

struct M4Side {
    double fitted = 0.0;
    int declared = 0;
    bool used_fallback = false;  // fewer than 8 eigenvalues: no meaningful fit
    int eigenvalue_count = 0;
};

struct M4Report {
    M4Side right;
    M4Side left;
    bool passed = false;
    std::string failure;
};

/// Log-log slope of the eigenvalue counting function N(Lambda) against
/// Lambda over thresholds 0.1..0.6 of the spectral radius.
M4Side weyl_fit(const RealVector& eigenvalues, int declared);
M4Side weyl_dimension(const DiracOperator& d, int declared);

/// Condition 4, matching spectral dimensions on both sides.
M4Report check_m4(const MoritaInstance& inst, double tolerance = 0.2);

struct M5Report {
    double scale = 0.0;        // sqrt(#G / #K)
    double isometry = 0.0;     // columns of the canonical map are W_Y-orthonormal
    double algebra = 0.0;      // invariant subalgebra vs the left representation
    double dirac = 0.0;        // invariant Dirac vs the left Dirac
    double grading = 0.0;
    double weights_gap = 0.0;  // pushforward volume vs the left triple's volume
    bool surjective = false;   // invariant dim equals the left section dim
    bool passed = false;
    std::string failure;
};

/// Condition 5, the invariant triple carried into the left triple by the
/// canonical scaled evaluation map.
M5Report check_m5(const MoritaInstance& inst, double tolerance = 1e-10);

struct SmoothnessVerdict {
    bool smooth = true;
    std::vector<int> singular_vertices;
};

/// Smooth quotient exactly when the right action is free.
SmoothnessVerdict smoothness_verdict(const GroupAction& action);

struct MoritaReport {
    ImprimitivityReport m1;
    M2Report m2;
    M3Report m3;
    M4Report m4;
    M5Report m5;
    SmoothnessVerdict smoothness;
    bool passed = false;
    std::string failure;
};

/// All five conditions on one instance, plus the smoothness verdict of the
/// right action.
MoritaReport full_report(const MoritaInstance& inst, int samples = 60, unsigned seed = 1,
                         double tolerance = 1e-10);

}  // namespace ncorb
