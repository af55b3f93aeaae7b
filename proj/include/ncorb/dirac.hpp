#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ncorb/algebra.hpp"
#include "ncorb/bundle.hpp"
#include "ncorb/graph.hpp"
#include "ncorb/linalg.hpp"

namespace ncorb {

using GraphPtr = std::shared_ptr<const MetricGraph>;
using BundlePtr = std::shared_ptr<const SpinorBundle>;

/// Volume weights: half the total length of the edges at each vertex
/// (h on uniform cycles).
RealVector default_volume(const MetricGraph& graph);

/// A lattice Dirac operator: a matrix on the section space (rank * vertices,
/// fiber-major) that is hermitian for the nu-weighted inner product and
/// local over the graph.  May carry a chiral grading.
class DiracOperator {
public:
    DiracOperator(GraphPtr graph, int rank, Matrix matrix, RealVector nu,
                  std::optional<Matrix> grading = std::nullopt);

    const GraphPtr& graph() const { return graph_; }
    int rank() const { return rank_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }
    const Matrix& matrix() const { return matrix_; }
    const RealVector& nu() const { return nu_; }
    const std::optional<Matrix>& grading() const { return grading_; }
    /// Diagonal weights of the section L2 product (nu repeated per fiber).
    RealVector weights() const;
    /// The off-diagonal block between two adjacent vertices.
    Matrix block(int x, int y) const;

private:
    GraphPtr graph_;
    int rank_;
    Matrix matrix_;
    RealVector nu_;
    std::optional<Matrix> grading_;
};

/// Lattice Dirac operators of the circle.  rank 1: central difference
/// (D psi)_j = (i/2h)(psi_{j+1} - psi_{j-1}), no grading.  rank 2:
/// off-diagonal forward/backward pair with grading diag(1,-1) per vertex.
DiracOperator circle_dirac(const GraphPtr& graph, int rank);

/// Copy without the chiral grading (used when a symmetry flips chirality,
/// so the graded structure is not equivariant and must be dropped).
DiracOperator drop_grading(const DiracOperator& d);

/// Eigenvalues (ascending, with multiplicity) for the nu-weighted structure.
RealVector spectrum(const DiracOperator& d);

/// The bounded phase F = D (1 + D^2)^{-1/2}.
Matrix approximate_sign(const DiracOperator& d);

/// The crossed-product representation on sections:
/// (a.psi)_x = w * sum_g a(g, g^{-1}x) rho(g)_{g^{-1}x} psi_{g^{-1}x}.
Matrix crossed_rep_matrix(const AlgebraElement& a, const SpinorBundle& bundle);
Vector crossed_rep(const AlgebraElement& a, const SpinorBundle& bundle, const Vector& psi);

/// Dimension of the kernel of the crossed representation on sections; zero
/// exactly when the representation is faithful.
int crossed_rep_kernel_dimension(const SpinorBundle& bundle);

/// A crossed-product spectral triple at desk scale: groupoid, equivariant
/// bundle, Dirac operator, optional grading, group unitaries.
class SpectralTripleData {
public:
    SpectralTripleData(GroupoidPtr groupoid, BundlePtr bundle, DiracOperator dirac,
                       int declared_dimension = 1);

    const GroupoidPtr& groupoid() const { return groupoid_; }
    const SpinorBundle& bundle() const { return *bundle_; }
    const BundlePtr& bundle_ptr() const { return bundle_; }
    const DiracOperator& dirac() const { return dirac_; }
    int dim() const { return dirac_.dim(); }
    int declared_dimension() const { return declared_dimension_; }
    const Matrix& unitary(int g) const { return unitaries_[static_cast<size_t>(g)]; }
    bool has_grading() const { return dirac_.grading().has_value(); }
    const Matrix& grading() const { return *dirac_.grading(); }
    RealVector weights() const { return dirac_.weights(); }

    Matrix rep(const AlgebraElement& a) const;

private:
    GroupoidPtr groupoid_;
    BundlePtr bundle_;
    DiracOperator dirac_;
    int declared_dimension_;
    std::vector<Matrix> unitaries_;
};

/// The compression of a triple to the G-invariant subspace.  Coordinates are
/// orthonormal (the basis columns are weighted-orthonormal in the ambient
/// space), so compressed operators live on a plain inner-product space.
struct InvariantTriple {
    Matrix basis;        // section_dim x r, nu-weighted orthonormal columns
    Matrix dirac;        // r x r, hermitian
    std::optional<Matrix> grading;
    std::vector<Matrix> algebra;  // compressed invariant-subalgebra actions
    int dim() const { return static_cast<int>(dirac.rows()); }
};

InvariantTriple invariant_triple(const SpectralTripleData& t, double tol = 1e-10);

}  // namespace ncorb
