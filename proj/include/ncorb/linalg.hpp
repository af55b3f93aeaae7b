#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncorb {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Raised when input data violates a structural requirement (malformed
/// tables, inconsistent anchors, non-covering graph data, ...).
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a precondition of an operation is violated (mismatched
/// conventions, non-commuting symmetry operators, non-free actions where
/// freeness is required, ...).
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double operator_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Eigenvalues of a matrix that is hermitian for the nu-weighted inner
/// product <psi, phi> = sum_i nu_i conj(psi_i) phi_i.  The weighted-hermitian
/// matrix is similar to the plain-hermitian W^{1/2} M W^{-1/2}.
RealVector weighted_hermitian_eigenvalues(const Matrix& m, const RealVector& nu);

/// Full eigensystem of a weighted-hermitian matrix; eigenvectors are returned
/// orthonormal for the weighted inner product, as columns.
struct WeightedEigen {
    RealVector values;
    Matrix vectors;
};
WeightedEigen weighted_hermitian_eigensystem(const Matrix& m, const RealVector& nu);

/// f(D) for f(x) = x / sqrt(1 + x^2), computed by eigendecomposition.
/// D must be hermitian for the nu-weighted inner product.
Matrix approximate_sign(const Matrix& d, const RealVector& nu);

/// Operator norm of M as a map (C^n, W_in-weighted) -> (C^m, W_out-weighted)
/// with diagonal positive weights: || W_out^{1/2} M W_in^{-1/2} ||.
double weighted_operator_norm(const Matrix& m, const RealVector& w_out, const RealVector& w_in);

/// Adjoint of M as a map (C^n, W_in) -> (C^m, W_out): W_in^{-1} M^dag W_out.
Matrix weighted_adjoint(const Matrix& m, const RealVector& w_out, const RealVector& w_in);

/// Numerical rank with relative singular-value threshold.
Eigen::Index numeric_rank(const Matrix& m, double rel_tol = 1e-10);

/// Sorted copy (ascending) of a real vector.
std::vector<double> sorted(const RealVector& v);

/// Max absolute difference between two sorted multisets of reals; infinity on
/// size mismatch.
double multiset_distance(std::vector<double> a, std::vector<double> b);

/// Deterministic formatting with 12 significant digits, for CSV output.
std::string format_sig12(double x);

}  // namespace ncorb
