#include "ncorb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ncorb {

namespace {

void check_weights(const RealVector& nu, Eigen::Index n) {
    if (nu.size() != n) throw ContractError("weight vector size mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(nu(i) > 0.0)) throw ContractError("weights must be strictly positive");
    }
}

}  // namespace

RealVector weighted_hermitian_eigenvalues(const Matrix& m, const RealVector& nu) {
    return weighted_hermitian_eigensystem(m, nu).values;
}

WeightedEigen weighted_hermitian_eigensystem(const Matrix& m, const RealVector& nu) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n) throw ContractError("eigensystem of non-square matrix");
    check_weights(nu, n);
    RealVector sqw = nu.array().sqrt();
    Matrix sym = sqw.asDiagonal() * m * sqw.cwiseInverse().asDiagonal();
    if (!is_hermitian(sym, 1e-9 * std::max(1.0, sym.cwiseAbs().maxCoeff()))) {
        throw ContractError("matrix is not hermitian for the weighted inner product");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.adjoint()));
    WeightedEigen out;
    out.values = es.eigenvalues();
    // Undo the similarity; columns become nu-orthonormal automatically.
    out.vectors = sqw.cwiseInverse().asDiagonal() * es.eigenvectors();
    return out;
}

Matrix approximate_sign(const Matrix& d, const RealVector& nu) {
    WeightedEigen es = weighted_hermitian_eigensystem(d, nu);
    const Eigen::Index n = d.rows();
    RealVector f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f(i) = es.values(i) / std::sqrt(1.0 + es.values(i) * es.values(i));
    }
    // Inverse of the weighted-orthonormal eigenbasis is its weighted adjoint.
    Matrix vinv = es.vectors.adjoint() * nu.asDiagonal();
    return es.vectors * f.asDiagonal() * vinv;
}

double weighted_operator_norm(const Matrix& m, const RealVector& w_out, const RealVector& w_in) {
    check_weights(w_out, m.rows());
    check_weights(w_in, m.cols());
    Matrix scaled = w_out.array().sqrt().matrix().asDiagonal() * m *
                    w_in.array().sqrt().inverse().matrix().asDiagonal();
    return operator_norm(scaled);
}

Matrix weighted_adjoint(const Matrix& m, const RealVector& w_out, const RealVector& w_in) {
    check_weights(w_out, m.rows());
    check_weights(w_in, m.cols());
    return w_in.cwiseInverse().asDiagonal() * m.adjoint() * w_out.asDiagonal();
}

Eigen::Index numeric_rank(const Matrix& m, double rel_tol) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    auto svd = m.jacobiSvd();
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > rel_tol * s(0)) ++r;
    }
    return r;
}

std::vector<double> sorted(const RealVector& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

double multiset_distance(std::vector<double> a, std::vector<double> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

std::string format_sig12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

}  // namespace ncorb
