#include "ncorb/dirac.hpp"

#include <cmath>

namespace ncorb {

RealVector default_volume(const MetricGraph& graph) {
    RealVector nu = RealVector::Zero(graph.vertex_count());
    for (const auto& e : graph.edges()) {
        nu(e.u) += 0.5 * e.length;
        nu(e.v) += 0.5 * e.length;
    }
    return nu;
}

DiracOperator::DiracOperator(GraphPtr graph, int rank, Matrix matrix, RealVector nu,
                             std::optional<Matrix> grading)
    : graph_(std::move(graph)), rank_(rank), matrix_(std::move(matrix)), nu_(std::move(nu)),
      grading_(std::move(grading)) {
    if (!graph_) throw StructuralError("Dirac operator needs a graph");
    const int n = graph_->vertex_count();
    if (rank_ <= 0) throw StructuralError("rank must be positive");
    if (matrix_.rows() != rank_ * n || matrix_.cols() != rank_ * n)
        throw StructuralError("Dirac matrix must act on the section space");
    if (nu_.size() != n) throw StructuralError("volume weights need one entry per vertex");
    for (int x = 0; x < n; ++x)
        if (!(nu_(x) > 0.0)) throw StructuralError("volume weights must be positive");
    // Hermitian for the weighted product.
    RealVector w = weights();
    Matrix sym = w.array().sqrt().matrix().asDiagonal() * matrix_ *
                 w.array().sqrt().inverse().matrix().asDiagonal();
    double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
    if ((sym - sym.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw StructuralError("Dirac matrix is not hermitian for the weighted inner product");
    // Locality: nonzero blocks only on equal or adjacent vertices.
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (x == y || graph_->adjacent(x, y)) continue;
            if (matrix_.block(x * rank_, y * rank_, rank_, rank_).cwiseAbs().maxCoeff() > 0.0)
                throw StructuralError("Dirac matrix couples non-adjacent vertices");
        }
    if (grading_) {
        if (grading_->rows() != matrix_.rows() || grading_->cols() != matrix_.cols())
            throw StructuralError("grading has wrong shape");
        if (!is_hermitian(*grading_))
            throw StructuralError("grading must be hermitian");
        if ((*grading_ * *grading_ - Matrix::Identity(matrix_.rows(), matrix_.cols()))
                .cwiseAbs()
                .maxCoeff() > 1e-12)
            throw StructuralError("grading must square to the identity");
        if ((*grading_ * matrix_ + matrix_ * *grading_).cwiseAbs().maxCoeff() > 1e-12)
            throw StructuralError("grading must anticommute with the Dirac matrix");
    }
}

RealVector DiracOperator::weights() const {
    RealVector w(dim());
    for (int x = 0; x < graph_->vertex_count(); ++x)
        for (int i = 0; i < rank_; ++i) w(x * rank_ + i) = nu_(x);
    return w;
}

Matrix DiracOperator::block(int x, int y) const {
    return matrix_.block(x * rank_, y * rank_, rank_, rank_);
}

DiracOperator circle_dirac(const GraphPtr& graph, int rank) {
    if (!is_uniform_cycle(*graph))
        throw StructuralError("circle Dirac needs a uniform cycle graph");
    const int n = graph->vertex_count();
    const double h = graph->edges().front().length;
    RealVector nu = RealVector::Constant(n, h);
    const Complex I(0.0, 1.0);
    if (rank == 1) {
        Matrix d = Matrix::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            d(j, (j + 1) % n) += I / (2.0 * h);
            d(j, (j - 1 + n) % n) -= I / (2.0 * h);
        }
        return DiracOperator(graph, 1, std::move(d), std::move(nu));
    }
    if (rank == 2) {
        // Forward/backward difference pair: component 1 receives the forward
        // difference of component 2 and vice versa with the adjoint.
        Matrix d = Matrix::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            int jp = (j + 1) % n;
            d(2 * j, 2 * jp + 1) += 1.0 / h;
            d(2 * j, 2 * j + 1) -= 1.0 / h;
            d(2 * jp + 1, 2 * j) += 1.0 / h;
            d(2 * j + 1, 2 * j) -= 1.0 / h;
        }
        Matrix omega = Matrix::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            omega(2 * j, 2 * j) = 1.0;
            omega(2 * j + 1, 2 * j + 1) = -1.0;
        }
        return DiracOperator(graph, 2, std::move(d), std::move(nu), std::move(omega));
    }
    throw StructuralError("circle Dirac rank must be 1 or 2");
}

DiracOperator drop_grading(const DiracOperator& d) {
    return DiracOperator(d.graph(), d.rank(), d.matrix(), d.nu());
}

RealVector spectrum(const DiracOperator& d) {
    return weighted_hermitian_eigenvalues(d.matrix(), d.weights());
}

Matrix approximate_sign(const DiracOperator& d) {
    return approximate_sign(d.matrix(), d.weights());
}

Matrix crossed_rep_matrix(const AlgebraElement& a, const SpinorBundle& bundle) {
    if (a.groupoid().get() != bundle.groupoid().get())
        throw StructuralError("algebra element and bundle live over different groupoids");
    const auto& gpd = *a.groupoid();
    const auto& grp = gpd.group();
    const auto& act = gpd.action();
    const int r = bundle.rank();
    const double w = gpd.weight();
    Matrix m = Matrix::Zero(bundle.section_dim(), bundle.section_dim());
    for (int x = 0; x < gpd.points(); ++x)
        for (int g = 0; g < grp.order(); ++g) {
            int y = act.apply(grp.inverse(g), x);
            m.block(x * r, y * r, r, r) += w * a(g, y) * bundle.rho(g, y);
        }
    return m;
}

Vector crossed_rep(const AlgebraElement& a, const SpinorBundle& bundle, const Vector& psi) {
    if (psi.size() != bundle.section_dim()) throw ContractError("section has wrong length");
    return crossed_rep_matrix(a, bundle) * psi;
}

int crossed_rep_kernel_dimension(const SpinorBundle& bundle) {
    const auto& gpd = *bundle.groupoid();
    const int dim = bundle.section_dim();
    Matrix stacked(dim * dim, gpd.arrows());
    for (int arrow = 0; arrow < gpd.arrows(); ++arrow) {
        AlgebraElement delta(bundle.groupoid());
        delta.set(gpd.arrow_group(arrow), gpd.arrow_point(arrow), 1.0);
        Matrix rep = crossed_rep_matrix(delta, bundle);
        stacked.col(arrow) = Eigen::Map<const Vector>(rep.data(), dim * dim);
    }
    return gpd.arrows() - static_cast<int>(numeric_rank(stacked));
}

SpectralTripleData::SpectralTripleData(GroupoidPtr groupoid, BundlePtr bundle,
                                       DiracOperator dirac, int declared_dimension)
    : groupoid_(std::move(groupoid)), bundle_(std::move(bundle)), dirac_(std::move(dirac)),
      declared_dimension_(declared_dimension) {
    if (!groupoid_ || !bundle_) throw StructuralError("spectral triple needs groupoid and bundle");
    if (bundle_->groupoid().get() != groupoid_.get())
        throw StructuralError("bundle is over a different groupoid");
    if (bundle_->rank() != dirac_.rank() || bundle_->points() != groupoid_->points() ||
        dirac_.dim() != bundle_->section_dim())
        throw StructuralError("bundle and Dirac dimensions disagree");
    // The volume must be G-invariant for the crossed representation to be a
    // *-representation.
    const auto& act = groupoid_->action();
    for (int g = 0; g < act.group().order(); ++g)
        for (int x = 0; x < act.points(); ++x)
            if (std::abs(dirac_.nu()(act.apply(g, x)) - dirac_.nu()(x)) > 1e-12)
                throw StructuralError("volume weights are not G-invariant");
    unitaries_.reserve(static_cast<size_t>(act.group().order()));
    for (int g = 0; g < act.group().order(); ++g)
        unitaries_.push_back(bundle_->group_unitary(g));
    double dscale = std::max(1.0, dirac_.matrix().cwiseAbs().maxCoeff());
    for (int g = 0; g < act.group().order(); ++g) {
        const Matrix& u = unitaries_[static_cast<size_t>(g)];
        if ((u * dirac_.matrix() - dirac_.matrix() * u).cwiseAbs().maxCoeff() > 1e-10 * dscale)
            throw ContractError("group unitaries must commute with the Dirac operator");
        if (has_grading() &&
            (u * grading() - grading() * u).cwiseAbs().maxCoeff() > 1e-10)
            throw ContractError("group unitaries must commute with the grading");
    }
}

Matrix SpectralTripleData::rep(const AlgebraElement& a) const {
    return crossed_rep_matrix(a, *bundle_);
}

InvariantTriple invariant_triple(const SpectralTripleData& t, double tol) {
    const int order = t.groupoid()->group().order();
    const int n = t.dim();
    Matrix p = Matrix::Zero(n, n);
    for (int g = 0; g < order; ++g) p += t.unitary(g);
    p /= static_cast<double>(order);
    const Matrix& d = t.dirac().matrix();
    double dscale = std::max(1.0, d.cwiseAbs().maxCoeff());
    if ((p * d - d * p).cwiseAbs().maxCoeff() > tol * dscale)
        throw ContractError("invariant projection does not commute with the Dirac operator");
    if (t.has_grading() &&
        (p * t.grading() - t.grading() * p).cwiseAbs().maxCoeff() > tol)
        throw ContractError("invariant projection does not commute with the grading");

    RealVector w = t.weights();
    WeightedEigen es = weighted_hermitian_eigensystem(p, w);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (es.values(i) > 0.5) keep.push_back(i);
    InvariantTriple out;
    out.basis = Matrix(n, static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) out.basis.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]);
    Matrix bw = out.basis.adjoint() * w.asDiagonal();  // weighted adjoint of the basis
    out.dirac = bw * d * out.basis;
    if (t.has_grading()) out.grading = bw * t.grading() * out.basis;
    for (const auto& a : invariant_subalgebra_basis(t.groupoid()))
        out.algebra.push_back(bw * t.rep(a) * out.basis);
    return out;
}

}  // namespace ncorb
