#pragma once

#include <vector>

#include "ncorb/groupoid.hpp"
#include "ncorb/linalg.hpp"

namespace ncorb {

/// A discrete equivariant vector bundle over the points of a group action:
/// a rank-r fiber per vertex, a unitary cocycle rho(g)_x : fiber(x) ->
/// fiber(g.x), and a hermitian positive fiber form per vertex (identity by
/// default).  Section vectors are stored fiber-major: component (x, i) sits
/// at index x*rank + i.
class SpinorBundle {
public:
    SpinorBundle(GroupoidPtr groupoid, int rank, std::vector<std::vector<Matrix>> cocycle,
                 std::vector<Matrix> fiber_forms = {});

    const GroupoidPtr& groupoid() const { return groupoid_; }
    int rank() const { return rank_; }
    int points() const { return groupoid_->points(); }
    int section_dim() const { return rank_ * points(); }
    const Matrix& rho(int g, int x) const;
    const Matrix& fiber_form(int x) const;
    bool trivial_forms() const { return trivial_forms_; }

    /// The unitary (U(g) psi)_x = rho(g)_{g^{-1}x} psi_{g^{-1}x} on sections.
    Matrix group_unitary(int g) const;

    /// Constant cocycle rho(g) = identity; valid for every action.
    static SpinorBundle trivial(GroupoidPtr groupoid, int rank);
    /// Rank-1 bundle over the Z/2 reflection of an even cycle with
    /// rho(r)_j = (-1)^j; makes the reflection commute with parity-odd
    /// stencils.
    static SpinorBundle alternating_reflection(GroupoidPtr groupoid);
    /// Rank-2 bundle over a dihedral-type action on a cycle: orientation
    /// preserving elements act by the identity on fibers, orientation
    /// reversing ones swap the two components.
    static SpinorBundle parity_swap(GroupoidPtr groupoid);

private:
    GroupoidPtr groupoid_;
    int rank_;
    std::vector<std::vector<Matrix>> cocycle_;  // [g][x]
    std::vector<Matrix> fiber_forms_;
    bool trivial_forms_;
};

/// Diagonal weight vector of the L2 structure: volume nu per vertex times
/// the fiber form (forms must be diagonal for this helper; the shipped
/// bundles all use identity forms).
RealVector section_weights(const SpinorBundle& bundle, const RealVector& nu);

}  // namespace ncorb
