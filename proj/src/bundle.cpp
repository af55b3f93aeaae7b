#include "ncorb/bundle.hpp"

#include <cmath>

namespace ncorb {

SpinorBundle::SpinorBundle(GroupoidPtr groupoid, int rank,
                           std::vector<std::vector<Matrix>> cocycle,
                           std::vector<Matrix> fiber_forms)
    : groupoid_(std::move(groupoid)), rank_(rank), cocycle_(std::move(cocycle)),
      fiber_forms_(std::move(fiber_forms)) {
    if (!groupoid_) throw StructuralError("bundle needs a groupoid");
    if (rank_ <= 0) throw StructuralError("bundle rank must be positive");
    const auto& grp = groupoid_->group();
    const auto& act = groupoid_->action();
    const int n = act.points();
    if (static_cast<int>(cocycle_.size()) != grp.order())
        throw StructuralError("cocycle needs one family per group element");
    for (const auto& family : cocycle_) {
        if (static_cast<int>(family.size()) != n)
            throw StructuralError("cocycle needs one matrix per point");
        for (const auto& m : family)
            if (m.rows() != rank_ || m.cols() != rank_)
                throw StructuralError("cocycle matrix has wrong shape");
    }
    if (fiber_forms_.empty()) {
        trivial_forms_ = true;
        fiber_forms_.assign(static_cast<size_t>(n), Matrix::Identity(rank_, rank_));
    } else {
        trivial_forms_ = false;
        if (static_cast<int>(fiber_forms_.size()) != n)
            throw StructuralError("fiber forms need one matrix per point");
        for (const auto& w : fiber_forms_) {
            if (w.rows() != rank_ || w.cols() != rank_ || !is_hermitian(w))
                throw StructuralError("fiber form must be hermitian of the bundle rank");
            Eigen::SelfAdjointEigenSolver<Matrix> es(w);
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw StructuralError("fiber form must be positive definite");
        }
    }
    // Identity element acts as the identity matrix.
    for (int x = 0; x < n; ++x)
        if ((rho(grp.identity(), x) - Matrix::Identity(rank_, rank_)).cwiseAbs().maxCoeff() > 1e-12)
            throw StructuralError("identity cocycle matrix must be the identity");
    // Cocycle condition rho(gh)_x = rho(g)_{h.x} rho(h)_x.
    for (int g = 0; g < grp.order(); ++g)
        for (int h = 0; h < grp.order(); ++h)
            for (int x = 0; x < n; ++x) {
                Matrix lhs = rho(grp.multiply(g, h), x);
                Matrix rhs = rho(g, act.apply(h, x)) * rho(h, x);
                if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12)
                    throw StructuralError("cocycle condition violated");
            }
    // Unitarity for the fiber forms: rho(g)_x^dag W_{g.x} rho(g)_x = W_x.
    for (int g = 0; g < grp.order(); ++g)
        for (int x = 0; x < n; ++x) {
            Matrix lhs = rho(g, x).adjoint() * fiber_form(act.apply(g, x)) * rho(g, x);
            if ((lhs - fiber_form(x)).cwiseAbs().maxCoeff() > 1e-10)
                throw StructuralError("cocycle is not unitary for the fiber forms");
        }
}

const Matrix& SpinorBundle::rho(int g, int x) const {
    if (g < 0 || g >= groupoid_->group().order()) throw ContractError("group element out of range");
    if (x < 0 || x >= points()) throw ContractError("point out of range");
    return cocycle_[static_cast<size_t>(g)][static_cast<size_t>(x)];
}

const Matrix& SpinorBundle::fiber_form(int x) const {
    if (x < 0 || x >= points()) throw ContractError("point out of range");
    return fiber_forms_[static_cast<size_t>(x)];
}

Matrix SpinorBundle::group_unitary(int g) const {
    const auto& act = groupoid_->action();
    const int ginv = groupoid_->group().inverse(g);
    Matrix u = Matrix::Zero(section_dim(), section_dim());
    for (int x = 0; x < points(); ++x) {
        int y = act.apply(ginv, x);
        u.block(x * rank_, y * rank_, rank_, rank_) = rho(g, y);
    }
    return u;
}

SpinorBundle SpinorBundle::trivial(GroupoidPtr groupoid, int rank) {
    const int order = groupoid->group().order();
    const int n = groupoid->points();
    std::vector<std::vector<Matrix>> cocycle(
        static_cast<size_t>(order),
        std::vector<Matrix>(static_cast<size_t>(n), Matrix::Identity(rank, rank)));
    return SpinorBundle(std::move(groupoid), rank, std::move(cocycle));
}

SpinorBundle SpinorBundle::alternating_reflection(GroupoidPtr groupoid) {
    const auto& act = groupoid->action();
    const int n = act.points();
    if (groupoid->group().order() != 2 || n % 2 != 0)
        throw StructuralError("alternating cocycle needs Z/2 on an even cycle");
    std::vector<std::vector<Matrix>> cocycle(2, std::vector<Matrix>(static_cast<size_t>(n)));
    for (int x = 0; x < n; ++x) {
        cocycle[0][static_cast<size_t>(x)] = Matrix::Identity(1, 1);
        cocycle[1][static_cast<size_t>(x)] = Matrix::Constant(1, 1, x % 2 == 0 ? 1.0 : -1.0);
    }
    return SpinorBundle(std::move(groupoid), 1, std::move(cocycle));
}

namespace {

// Orientation parity of a cycle isometry: +1 for rotations, -1 for
// reflections, judged from how it maps the edge 0 -> 1.
int cycle_parity(const GroupAction& act, int g) {
    const int n = act.points();
    int a = act.apply(g, 0);
    int b = act.apply(g, 1);
    if ((a + 1) % n == b) return 1;
    if ((b + 1) % n == a) return -1;
    throw StructuralError("group element is not a cycle isometry");
}

}  // namespace

SpinorBundle SpinorBundle::parity_swap(GroupoidPtr groupoid) {
    const auto& act = groupoid->action();
    const int n = act.points();
    Matrix swap(2, 2);
    swap << 0, 1, 1, 0;
    std::vector<std::vector<Matrix>> cocycle(
        static_cast<size_t>(groupoid->group().order()),
        std::vector<Matrix>(static_cast<size_t>(n)));
    for (int g = 0; g < groupoid->group().order(); ++g) {
        Matrix m = cycle_parity(act, g) == 1 ? Matrix::Identity(2, 2) : swap;
        for (int x = 0; x < n; ++x) cocycle[static_cast<size_t>(g)][static_cast<size_t>(x)] = m;
    }
    return SpinorBundle(std::move(groupoid), 2, std::move(cocycle));
}

RealVector section_weights(const SpinorBundle& bundle, const RealVector& nu) {
    if (nu.size() != bundle.points()) throw ContractError("volume vector has wrong length");
    RealVector w(bundle.section_dim());
    for (int x = 0; x < bundle.points(); ++x) {
        const Matrix& form = bundle.fiber_form(x);
        Matrix offdiag = form;
        offdiag.diagonal().setZero();
        if (offdiag.cwiseAbs().maxCoeff() > 1e-12)
            throw ContractError("section_weights needs diagonal fiber forms");
        for (int i = 0; i < bundle.rank(); ++i)
            w(x * bundle.rank() + i) = nu(x) * form(i, i).real();
    }
    return w;
}

}  // namespace ncorb
