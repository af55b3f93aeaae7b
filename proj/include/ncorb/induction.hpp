#pragma once

#include <optional>
#include <vector>

#include "ncorb/bimodule.hpp"
#include "ncorb/bitorsor.hpp"
#include "ncorb/dirac.hpp"

namespace ncorb {

/// The Hilbert space induced by a bitorsor from the right-side section space:
/// the balanced tensor product of sections over Q with ambient sections,
/// realized concretely on the spanning set delta_q (x) e_i with i a fiber
/// index at rho(q).  gram is the semi-inner product of that spanning set;
/// pi maps formal spanning coordinates onto an orthonormal basis of the
/// quotient by the null space, and pi_plus is its right inverse.
struct InducedHilbert {
    BitorsorPtr bitorsor;
    BundlePtr bundle;            // ambient bundle on the right base
    RealVector ambient_nu;       // per-vertex volume on the right base
    RealVector ambient_weights;  // per-component section weights
    Matrix gram;                 // (q_count * rank)^2
    Matrix pi;                   // dim x (q_count * rank)
    Matrix pi_plus;              // (q_count * rank) x dim
    int rank = 0;
    int dim = 0;
};

InducedHilbert induced_space(BitorsorPtr bitorsor, BundlePtr bundle, RealVector nu,
                             double rel_tol = 1e-10);

/// Weights of the pulled-back section space over Q: volume at rho(q) divided
/// by the alpha fiber size, repeated per fiber component.
RealVector q_section_weights(const InducedHilbert& h);

/// The creation map T_u : ambient sections -> induced space, xi -> u (x) xi,
/// in orthonormal induced coordinates.
Matrix t_u(const InducedHilbert& h, const BimoduleElement& u);
/// Its adjoint for the weighted ambient product.
Matrix t_u_adjoint(const InducedHilbert& h, const BimoduleElement& u);

/// An operator on formal spanning coordinates pushed down to the induced
/// space; null_residual measures how badly it fails to preserve the null
/// space of the gram (must vanish for the descent to be legitimate).
struct DescendedOp {
    Matrix op;
    double null_residual = 0.0;
};

/// The left module action of the left groupoid algebra on the induced space.
DescendedOp induced_left_action(const InducedHilbert& h, const AlgebraElement& b);

/// The comparison map from formal spanning coordinates to sections of the
/// pulled-back bundle over Q:
/// chi(f (x) psi)_q = w_Theta * sum over sigma in the target fiber at rho(q)
/// of f(q . sigma) rho(sigma) psi at s(sigma).
Matrix chi(const InducedHilbert& h);

/// Pull an ambient operator back to Q sections: blocks are copied along rho
/// over pairs that are equal or adjacent in the lifted graph.
Matrix pullback_operator(const InducedHilbert& h, const CoveringGraph& q_graph,
                         const Matrix& ambient_op);

struct ChiIso {
    Matrix map;                 // Q sections x dim, acting on orthonormal coords
    double null_residual = 0.0;  // chi must kill the gram null space
    int rank = 0;                // must equal dim: injectivity
    double predicted_scale = 0.0;  // w_Theta / w_Xi
    double measured_scale = 0.0;
    double ratio_deviation = 0.0;  // worst |<chi u, chi v> / <u,v> - scale|
    double intertwining_residual = 0.0;  // vs the left action on Q sections
};

/// Verifies that chi descends to a scaled isometry onto its image and
/// intertwines the left actions; the scale is sampled over random pairs.
ChiIso chi_iso(const InducedHilbert& h, int pairs, unsigned seed);

/// The pushforward bundle over the left base: fiberwise coordinates at the
/// canonical section q*(y), the extension operator from coordinates to
/// equivariant sections along the alpha fiber, and the induced volume.
struct PushforwardBundle {
    int rank = 0;
    std::vector<int> base_points;   // q*(y) per y
    Matrix extension;               // (q_count * rank) x (y_count * rank)
    RealVector nu_sharp;            // per-y volume
};

PushforwardBundle pushforward_bundle(const InducedHilbert& h);

struct InducedDiracResult {
    DiracOperator op;
    /// Norm of (1 - P) D_Q P with P the projector onto equivariant sections:
    /// how badly the pulled-back operator leaks out of the subspace the
    /// descent lives on.
    double subspace_residual = 0.0;
};

/// The Dirac operator induced on the left base through the lifted graph:
/// blocks of the ambient operator transported back to the canonical section
/// by the inverse cocycle.
InducedDiracResult induced_dirac(const InducedHilbert& h, const CoveringGraph& q_graph,
                                 const DiracOperator& ambient, const GraphPtr& y_graph);

/// Descend an ambient grading fiberwise along q*(y); throws ContractError if
/// the grading is not constant on alpha fibers after transport.
Matrix induced_grading(const InducedHilbert& h, const Matrix& ambient_grading);

/// Sup norm of [D, m_f] psi - (D f) . psi for a scalar Dirac operator: the
/// defect between the commutator and pointwise multiplication by the
/// derivative.  First order in the mesh for kinked f, exactly zero for
/// constant f.
double prop5_defect(const DiracOperator& d, const RealVector& f, const Vector& psi);

struct Prop5Report {
    double constant_residual = 0.0;
    std::vector<double> tent_defects;   // one per quotient size
    std::vector<double> tent_ratios;    // defect(2m) / defect(m)
    std::vector<double> random_defects;
    bool ratios_in_band = false;        // all ratios within [0.3, 0.7]
};

/// Drives the full induction pipeline over a family of rotation quotients
/// (ambient circle of size 2m modded by the half turn), computing the
/// first-order defect downstairs for a constant function, a kinked tent, and
/// random smooth samples.  Sizes must be divisible by 8 so the tent kinks sit
/// on lattice points.
Prop5Report verify_prop5(const std::vector<int>& quotient_sizes, HaarConvention haar,
                         unsigned seed);

struct UPhiResult {
    Matrix map;   // (y_count * rank) x invariant_dim
    double scale = 0.0;  // sqrt(#G / #K)
    double isometry_residual = 0.0;
};

/// The canonical unitary of the invariant-versus-induced comparison:
/// sqrt(#G/#K) times evaluation at rho(q*(y)), restricted to the invariant
/// subspace spanned by the columns of inv.basis.  y_weights are the
/// section weights of the left base.
UPhiResult u_phi(const InducedHilbert& h, const InvariantTriple& inv,
                 const RealVector& y_weights);

}  // namespace ncorb
