#include "ncorb/induction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace ncorb {

InducedHilbert induced_space(BitorsorPtr bitorsor, BundlePtr bundle, RealVector nu,
                             double rel_tol) {
    if (!bitorsor || !bundle) throw StructuralError("induced space needs a bitorsor and a bundle");
    if (bundle->groupoid().get() != bitorsor->right_groupoid().get())
        throw ContractError("the bundle must live over the right groupoid");
    if (nu.size() != bundle->points()) throw StructuralError("volume vector has wrong length");
    if (nu.minCoeff() <= 0.0) throw StructuralError("volume weights must be positive");

    InducedHilbert h;
    h.bitorsor = std::move(bitorsor);
    h.bundle = std::move(bundle);
    h.ambient_nu = std::move(nu);
    h.ambient_weights = section_weights(*h.bundle, h.ambient_nu);
    h.rank = h.bundle->rank();

    const MoritaBitorsor& b = *h.bitorsor;
    const ActionGroupoid& theta = *b.right_groupoid();
    const int r = h.rank;
    const int n_formal = b.q_count() * r;
    const double w_pair = theta.weight() * b.left_groupoid()->weight();

    // <delta_q (x) e_i, delta_q' (x) e_i'> : the Theta pairing of two delta
    // sections is supported on the single arrow moving q to q', so the gram
    // block is the cocycle of that arrow times both Haar weights and the
    // ambient weight at rho(q).
    h.gram = Matrix::Zero(n_formal, n_formal);
    for (int q = 0; q < b.q_count(); ++q)
        for (int q2 = 0; q2 < b.q_count(); ++q2) {
            if (b.alpha(q) != b.alpha(q2)) continue;
            int sigma = b.sigma_between(q, q2);
            const Matrix& rho = h.bundle->rho(theta.arrow_group(sigma),
                                              theta.arrow_point(sigma));
            for (int i = 0; i < r; ++i)
                for (int i2 = 0; i2 < r; ++i2)
                    h.gram(q * r + i, q2 * r + i2) =
                        h.ambient_weights(b.rho(q) * r + i) * w_pair * rho(i, i2);
        }

    Eigen::SelfAdjointEigenSolver<Matrix> es((h.gram + h.gram.adjoint()) / 2.0);
    const RealVector& evals = es.eigenvalues();
    double lambda_max = evals.maxCoeff();
    if (lambda_max <= 0.0) throw ContractError("induced space is degenerate");
    std::vector<int> keep;
    for (int k = 0; k < evals.size(); ++k)
        if (evals(k) > rel_tol * lambda_max) keep.push_back(k);
    h.dim = static_cast<int>(keep.size());
    Matrix u_pos(n_formal, h.dim);
    RealVector lam(h.dim);
    for (int k = 0; k < h.dim; ++k) {
        u_pos.col(k) = es.eigenvectors().col(keep[static_cast<size_t>(k)]);
        lam(k) = evals(keep[static_cast<size_t>(k)]);
    }
    h.pi = lam.cwiseSqrt().asDiagonal() * u_pos.adjoint();
    h.pi_plus = u_pos * lam.cwiseSqrt().cwiseInverse().asDiagonal();
    return h;
}

RealVector q_section_weights(const InducedHilbert& h) {
    const MoritaBitorsor& b = *h.bitorsor;
    const int r = h.rank;
    const double fiber_size = b.right_groupoid()->group().order();
    RealVector w(b.q_count() * r);
    for (int q = 0; q < b.q_count(); ++q)
        for (int i = 0; i < r; ++i)
            w(q * r + i) = h.ambient_weights(b.rho(q) * r + i) / fiber_size;
    return w;
}

namespace {

Matrix t_u_formal(const InducedHilbert& h, const BimoduleElement& u) {
    const MoritaBitorsor& b = *h.bitorsor;
    const int r = h.rank;
    Matrix f = Matrix::Zero(b.q_count() * r, h.bundle->section_dim());
    for (int q = 0; q < b.q_count(); ++q)
        for (int i = 0; i < r; ++i) f(q * r + i, b.rho(q) * r + i) = u(q);
    return f;
}

}  // namespace

Matrix t_u(const InducedHilbert& h, const BimoduleElement& u) {
    if (u.bitorsor().get() != h.bitorsor.get())
        throw ContractError("section lives on a different bitorsor");
    return h.pi * t_u_formal(h, u);
}

Matrix t_u_adjoint(const InducedHilbert& h, const BimoduleElement& u) {
    return weighted_adjoint(t_u(h, u), RealVector::Ones(h.dim), h.ambient_weights);
}

DescendedOp induced_left_action(const InducedHilbert& h, const AlgebraElement& b_elt) {
    const MoritaBitorsor& b = *h.bitorsor;
    if (b_elt.groupoid().get() != b.left_groupoid().get())
        throw ContractError("left action needs an element of the left groupoid algebra");
    const ActionGroupoid& xi = *b.left_groupoid();
    const int r = h.rank;
    const int n_formal = b.q_count() * r;
    Matrix l_formal = Matrix::Zero(n_formal, n_formal);
    for (int q = 0; q < b.q_count(); ++q)
        for (int tau : xi.source_fiber(b.alpha(q))) {
            int q2 = *b.left_act(tau, q);
            for (int i = 0; i < r; ++i)
                l_formal(q2 * r + i, q * r + i) += xi.weight() * b_elt(tau);
        }
    DescendedOp out;
    Matrix null_proj = Matrix::Identity(n_formal, n_formal) - h.pi_plus * h.pi;
    out.null_residual = operator_norm(h.pi * l_formal * null_proj);
    out.op = h.pi * l_formal * h.pi_plus;
    return out;
}

Matrix chi(const InducedHilbert& h) {
    const MoritaBitorsor& b = *h.bitorsor;
    const ActionGroupoid& theta = *b.right_groupoid();
    const int r = h.rank;
    const int n_formal = b.q_count() * r;
    Matrix m = Matrix::Zero(n_formal, n_formal);
    for (int p = 0; p < b.q_count(); ++p)
        for (int q = 0; q < b.q_count(); ++q) {
            if (b.alpha(p) != b.alpha(q)) continue;
            int sigma = b.sigma_between(p, q);
            const Matrix& rho = h.bundle->rho(theta.arrow_group(sigma),
                                              theta.arrow_point(sigma));
            m.block(p * r, q * r, r, r) = theta.weight() * rho;
        }
    return m;
}

Matrix pullback_operator(const InducedHilbert& h, const CoveringGraph& q_graph,
                         const Matrix& ambient_op) {
    const MoritaBitorsor& b = *h.bitorsor;
    if (q_graph.vertex_count() != b.q_count())
        throw StructuralError("lifted graph does not match the bitorsor space");
    const int r = h.rank;
    if (ambient_op.rows() != h.bundle->section_dim() ||
        ambient_op.cols() != h.bundle->section_dim())
        throw StructuralError("ambient operator has wrong dimensions");
    Matrix out = Matrix::Zero(b.q_count() * r, b.q_count() * r);
    for (int p = 0; p < b.q_count(); ++p) {
        out.block(p * r, p * r, r, r) =
            ambient_op.block(b.rho(p) * r, b.rho(p) * r, r, r);
        for (const auto& [p2, len] : q_graph.neighbors(p)) {
            (void)len;
            out.block(p * r, p2 * r, r, r) =
                ambient_op.block(b.rho(p) * r, b.rho(p2) * r, r, r);
        }
    }
    return out;
}

ChiIso chi_iso(const InducedHilbert& h, int pairs, unsigned seed) {
    if (pairs <= 0) throw ContractError("pair count must be positive");
    const MoritaBitorsor& b = *h.bitorsor;
    ChiIso out;
    Matrix chi_formal = chi(h);
    const int n_formal = b.q_count() * h.rank;
    Matrix null_proj = Matrix::Identity(n_formal, n_formal) - h.pi_plus * h.pi;
    out.null_residual = operator_norm(chi_formal * null_proj);
    out.map = chi_formal * h.pi_plus;
    out.rank = static_cast<int>(numeric_rank(out.map));
    out.predicted_scale = b.right_groupoid()->weight() / b.left_groupoid()->weight();

    RealVector w_q = q_section_weights(h);
    Matrix gram_image = out.map.adjoint() * w_q.asDiagonal() * out.map;
    out.measured_scale = gram_image.real().trace() / h.dim;

    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_vec = [&]() {
        Vector v(h.dim);
        for (int k = 0; k < h.dim; ++k) v(k) = Complex(gauss(rng), gauss(rng));
        return v;
    };
    double worst = 0.0;
    for (int s = 0; s < pairs; ++s) {
        Vector u = random_vec();
        Vector v = random_vec();
        Complex inner = u.adjoint() * v;
        Complex image_inner = (out.map * u).adjoint() * w_q.asDiagonal() * (out.map * v);
        worst = std::max(worst, std::abs(image_inner / inner - out.measured_scale));
    }
    out.ratio_deviation = worst;

    // Intertwining against the left action on pulled-back sections, over the
    // full delta basis of the left algebra.
    const ActionGroupoid& xi = *b.left_groupoid();
    const int r = h.rank;
    double worst_intertwine = 0.0;
    for (int arrow = 0; arrow < xi.arrows(); ++arrow) {
        AlgebraElement delta(b.left_groupoid());
        delta.set(xi.arrow_group(arrow), xi.arrow_point(arrow), Complex(1.0, 0.0));
        Matrix action_q = Matrix::Zero(n_formal, n_formal);
        for (int q = 0; q < b.q_count(); ++q)
            for (int tau : xi.source_fiber(b.alpha(q))) {
                int q2 = *b.left_act(tau, q);
                for (int i = 0; i < r; ++i)
                    action_q(q2 * r + i, q * r + i) += xi.weight() * delta(tau);
            }
        Matrix lhs = out.map * induced_left_action(h, delta).op;
        Matrix rhs = action_q * out.map;
        worst_intertwine = std::max(
            worst_intertwine,
            weighted_operator_norm(lhs - rhs, w_q, RealVector::Ones(h.dim)));
    }
    out.intertwining_residual = worst_intertwine;
    return out;
}

PushforwardBundle pushforward_bundle(const InducedHilbert& h) {
    const MoritaBitorsor& b = *h.bitorsor;
    const ActionGroupoid& theta = *b.right_groupoid();
    if (!h.bundle->trivial_forms())
        throw ContractError("pushforward asks for identity fiber forms");
    PushforwardBundle out;
    out.rank = h.rank;
    const int r = h.rank;
    const int y_count = b.left_groupoid()->points();
    const double fiber_size = theta.group().order();
    out.base_points.resize(static_cast<size_t>(y_count));
    out.extension = Matrix::Zero(b.q_count() * r, y_count * r);
    out.nu_sharp = RealVector::Zero(y_count);
    for (int y = 0; y < y_count; ++y) {
        int base = b.q_star(y);
        out.base_points[static_cast<size_t>(y)] = base;
        for (int p : b.alpha_fiber(y)) {
            // u_p = rho(sigma_p)^{-1} u_base with base . sigma_p = p.
            int sigma = b.sigma_between(base, p);
            int inv = theta.inverse(sigma);
            const Matrix& transport =
                h.bundle->rho(theta.arrow_group(inv), theta.arrow_point(inv));
            out.extension.block(p * r, y * r, r, r) = transport;
            out.nu_sharp(y) += h.ambient_nu(b.rho(p)) / fiber_size;
        }
    }
    return out;
}

InducedDiracResult induced_dirac(const InducedHilbert& h, const CoveringGraph& q_graph,
                                 const DiracOperator& ambient, const GraphPtr& y_graph) {
    const MoritaBitorsor& b = *h.bitorsor;
    if (ambient.rank() != h.rank) throw ContractError("rank mismatch with the ambient operator");
    if (ambient.dim() != h.bundle->section_dim())
        throw ContractError("ambient operator has wrong dimensions");
    if (!y_graph || y_graph->vertex_count() != b.left_groupoid()->points())
        throw StructuralError("target graph does not match the left base");

    PushforwardBundle pf = pushforward_bundle(h);
    Matrix d_q = pullback_operator(h, q_graph, ambient.matrix());
    RealVector w_q = q_section_weights(h);
    const int r = h.rank;
    const int y_count = b.left_groupoid()->points();

    // Projector onto equivariant sections, orthonormalizing the extension
    // columns for the weighted product on Q sections.
    Matrix e_norm = pf.extension;
    for (int y = 0; y < y_count; ++y)
        e_norm.middleCols(y * r, r) /= std::sqrt(pf.nu_sharp(y));
    Matrix projector = e_norm * e_norm.adjoint() * w_q.asDiagonal();
    Matrix leak = (Matrix::Identity(d_q.rows(), d_q.cols()) - projector) * d_q * projector;

    InducedDiracResult out{
        DiracOperator(y_graph, r,
                      [&] {
                          Matrix d_coord(y_count * r, y_count * r);
                          Matrix lifted = d_q * pf.extension;
                          for (int y = 0; y < y_count; ++y)
                              d_coord.middleRows(y * r, r) =
                                  lifted.middleRows(pf.base_points[static_cast<size_t>(y)] * r, r);
                          return d_coord;
                      }(),
                      pf.nu_sharp),
        weighted_operator_norm(leak, w_q, w_q)};
    return out;
}

Matrix induced_grading(const InducedHilbert& h, const Matrix& ambient_grading) {
    const MoritaBitorsor& b = *h.bitorsor;
    const ActionGroupoid& theta = *b.right_groupoid();
    const int r = h.rank;
    if (ambient_grading.rows() != h.bundle->section_dim())
        throw StructuralError("grading has wrong dimensions");
    const int y_count = b.left_groupoid()->points();
    Matrix out = Matrix::Zero(y_count * r, y_count * r);
    for (int y = 0; y < y_count; ++y) {
        int base = b.q_star(y);
        Matrix block = ambient_grading.block(b.rho(base) * r, b.rho(base) * r, r, r);
        for (int p : b.alpha_fiber(y)) {
            int sigma = b.sigma_between(base, p);
            const Matrix& rho = h.bundle->rho(theta.arrow_group(sigma),
                                              theta.arrow_point(sigma));
            Matrix transported =
                rho * ambient_grading.block(b.rho(p) * r, b.rho(p) * r, r, r) *
                rho.adjoint();
            if ((transported - block).cwiseAbs().maxCoeff() > 1e-12)
                throw ContractError("grading is not constant along the alpha fiber at y=" +
                                    std::to_string(y));
        }
        out.block(y * r, y * r, r, r) = block;
    }
    return out;
}

double prop5_defect(const DiracOperator& d, const RealVector& f, const Vector& psi) {
    if (d.rank() != 1) throw ContractError("first-order defect is defined for scalar fibers");
    if (f.size() != d.dim() || psi.size() != d.dim())
        throw ContractError("function and section must match the operator dimension");
    Vector fc = f.cast<Complex>();
    Matrix commutator = d.matrix() * fc.asDiagonal() - fc.asDiagonal() * d.matrix();
    Vector derivative = d.matrix() * fc;
    Vector defect = commutator * psi - derivative.cwiseProduct(psi);
    return defect.cwiseAbs().maxCoeff();
}

namespace {

RealVector kinked_tent(int m) {
    // Tent centered at m/4 with half width m/8; kinks on lattice points.
    RealVector f = RealVector::Zero(m);
    const double center = m / 4.0;
    const double half_width = m / 8.0;
    for (int j = 0; j < m; ++j) {
        double dist = std::abs(j - center);
        dist = std::min(dist, m - dist);
        f(j) = std::max(0.0, 1.0 - dist / half_width);
    }
    return f;
}

}  // namespace

Prop5Report verify_prop5(const std::vector<int>& quotient_sizes, HaarConvention haar,
                         unsigned seed) {
    if (quotient_sizes.empty()) throw ContractError("need at least one quotient size");
    Prop5Report report;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int m : quotient_sizes) {
        if (m < 16 || m % 8 != 0)
            throw ContractError("quotient sizes must be multiples of 8, at least 16");
        const int n = 2 * m;
        auto x_graph = std::make_shared<const MetricGraph>(refine_circle(n, 2 * M_PI));
        auto y_graph = std::make_shared<const MetricGraph>(refine_circle(m, M_PI));
        GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(n, 2), haar);
        auto bundle = std::make_shared<const SpinorBundle>(SpinorBundle::trivial(theta, 1));
        DiracOperator ambient = circle_dirac(x_graph, 1);
        auto bitorsor =
            std::make_shared<const MoritaBitorsor>(quotient_bitorsor(theta));
        CoveringGraph q_graph = lift_graph(*bitorsor, *x_graph, *y_graph);
        InducedHilbert h = induced_space(bitorsor, bundle, default_volume(*x_graph));
        InducedDiracResult induced = induced_dirac(h, q_graph, ambient, y_graph);

        Vector psi(m);
        for (int j = 0; j < m; ++j) psi(j) = std::sin(2.0 * M_PI * j / m);

        report.constant_residual = std::max(
            report.constant_residual,
            prop5_defect(induced.op, RealVector::Ones(m), psi));
        report.tent_defects.push_back(prop5_defect(induced.op, kinked_tent(m), psi));
        RealVector random_f(m);
        for (int j = 0; j < m; ++j) random_f(j) = gauss(rng);
        report.random_defects.push_back(prop5_defect(induced.op, random_f, psi));
    }
    for (size_t k = 0; k + 1 < quotient_sizes.size(); ++k)
        if (quotient_sizes[k + 1] == 2 * quotient_sizes[k])
            report.tent_ratios.push_back(report.tent_defects[k + 1] /
                                         report.tent_defects[k]);
    report.ratios_in_band = !report.tent_ratios.empty();
    for (double ratio : report.tent_ratios)
        if (ratio < 0.3 || ratio > 0.7) report.ratios_in_band = false;
    return report;
}

UPhiResult u_phi(const InducedHilbert& h, const InvariantTriple& inv,
                 const RealVector& y_weights) {
    const MoritaBitorsor& b = *h.bitorsor;
    const int r = h.rank;
    const int y_count = b.left_groupoid()->points();
    if (y_weights.size() != y_count * r)
        throw StructuralError("left base weights have wrong length");
    if (inv.basis.rows() != h.bundle->section_dim())
        throw ContractError("invariant basis does not match the ambient space");

    Matrix evaluation = Matrix::Zero(y_count * r, h.bundle->section_dim());
    for (int y = 0; y < y_count; ++y) {
        int x = b.rho(b.q_star(y));
        for (int i = 0; i < r; ++i) evaluation(y * r + i, x * r + i) = 1.0;
    }
    UPhiResult out;
    out.scale = std::sqrt(static_cast<double>(b.right_groupoid()->group().order()) /
                          b.left_groupoid()->group().order());
    out.map = out.scale * evaluation * inv.basis;
    Matrix gram = out.map.adjoint() * y_weights.asDiagonal() * out.map;
    out.isometry_residual =
        (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    return out;
}

}  // namespace ncorb
