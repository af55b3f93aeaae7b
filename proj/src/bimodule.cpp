#include "ncorb/bimodule.hpp"

#include <algorithm>
#include <random>

namespace ncorb {

BimoduleElement::BimoduleElement(BitorsorPtr bitorsor, Vector values)
    : bitorsor_(std::move(bitorsor)), values_(std::move(values)) {
    if (!bitorsor_) throw StructuralError("bimodule element needs a bitorsor");
    if (values_.size() != bitorsor_->q_count())
        throw StructuralError("bimodule element has wrong length");
}

BimoduleElement::BimoduleElement(BitorsorPtr bitorsor)
    : BimoduleElement(bitorsor, Vector::Zero(bitorsor ? bitorsor->q_count() : 0)) {}

BimoduleElement BimoduleElement::operator+(const BimoduleElement& other) const {
    if (bitorsor_.get() != other.bitorsor_.get())
        throw ContractError("bimodule elements live on different bitorsors");
    return BimoduleElement(bitorsor_, values_ + other.values_);
}

BimoduleElement BimoduleElement::operator-(const BimoduleElement& other) const {
    if (bitorsor_.get() != other.bitorsor_.get())
        throw ContractError("bimodule elements live on different bitorsors");
    return BimoduleElement(bitorsor_, values_ - other.values_);
}

BimoduleElement BimoduleElement::operator*(Complex scalar) const {
    return BimoduleElement(bitorsor_, values_ * scalar);
}

double BimoduleElement::max_abs_diff(const BimoduleElement& other) const {
    if (bitorsor_.get() != other.bitorsor_.get())
        throw ContractError("bimodule elements live on different bitorsors");
    return (values_ - other.values_).cwiseAbs().maxCoeff();
}

BimoduleElement delta_section(const BitorsorPtr& bitorsor, int q) {
    BimoduleElement f(bitorsor);
    f.set(q, Complex(1.0, 0.0));
    return f;
}

BimoduleElement right_action(const BimoduleElement& f, const AlgebraElement& a) {
    const auto& b = *f.bitorsor();
    if (a.groupoid().get() != b.right_groupoid().get())
        throw ContractError("right action needs an element of the right groupoid algebra");
    const ActionGroupoid& theta = *b.right_groupoid();
    const double w = theta.weight();
    Vector out = Vector::Zero(b.q_count());
    for (int q = 0; q < b.q_count(); ++q) {
        Complex acc(0.0, 0.0);
        for (int sigma : theta.target_fiber(b.rho(q)))
            acc += a(theta.inverse(sigma)) * f(*b.right_act(q, sigma));
        out(q) = w * acc;
    }
    return BimoduleElement(f.bitorsor(), std::move(out));
}

BimoduleElement left_action(const AlgebraElement& b_elt, const BimoduleElement& f) {
    const auto& b = *f.bitorsor();
    if (b_elt.groupoid().get() != b.left_groupoid().get())
        throw ContractError("left action needs an element of the left groupoid algebra");
    const ActionGroupoid& xi = *b.left_groupoid();
    const double w = xi.weight();
    Vector out = Vector::Zero(b.q_count());
    for (int q = 0; q < b.q_count(); ++q) {
        Complex acc(0.0, 0.0);
        for (int tau : xi.target_fiber(b.alpha(q)))
            acc += b_elt(tau) * f(*b.left_act(xi.inverse(tau), q));
        out(q) = w * acc;
    }
    return BimoduleElement(f.bitorsor(), std::move(out));
}

AlgebraElement pairing_theta(const BimoduleElement& f1, const BimoduleElement& f2) {
    if (f1.bitorsor().get() != f2.bitorsor().get())
        throw ContractError("pairing needs sections of one bitorsor");
    const auto& b = *f1.bitorsor();
    const ActionGroupoid& theta = *b.right_groupoid();
    const double w = b.left_groupoid()->weight();
    AlgebraElement out(b.right_groupoid());
    Vector vals = Vector::Zero(theta.arrows());
    for (int sigma = 0; sigma < theta.arrows(); ++sigma) {
        Complex acc(0.0, 0.0);
        for (int p : b.rho_fiber(theta.target(sigma)))
            acc += std::conj(f1(p)) * f2(*b.right_act(p, sigma));
        vals(sigma) = w * acc;
    }
    return AlgebraElement(b.right_groupoid(), std::move(vals));
}

Complex pairing_theta_at(const BimoduleElement& f1, const BimoduleElement& f2, int sigma,
                         int q) {
    const auto& b = *f1.bitorsor();
    const ActionGroupoid& theta = *b.right_groupoid();
    const ActionGroupoid& xi = *b.left_groupoid();
    if (b.rho(q) != theta.target(sigma))
        throw ContractError("base point does not sit over the target of sigma");
    Complex acc(0.0, 0.0);
    for (int tau : xi.source_fiber(b.alpha(q))) {
        int p = *b.left_act(tau, q);
        acc += std::conj(f1(p)) * f2(*b.right_act(p, sigma));
    }
    return xi.weight() * acc;
}

AlgebraElement pairing_xi(const BimoduleElement& f1, const BimoduleElement& f2) {
    if (f1.bitorsor().get() != f2.bitorsor().get())
        throw ContractError("pairing needs sections of one bitorsor");
    const auto& b = *f1.bitorsor();
    const ActionGroupoid& xi = *b.left_groupoid();
    const double w = b.right_groupoid()->weight();
    Vector vals = Vector::Zero(xi.arrows());
    for (int tau = 0; tau < xi.arrows(); ++tau) {
        Complex acc(0.0, 0.0);
        for (int p : b.alpha_fiber(xi.target(tau)))
            acc += f1(p) * std::conj(f2(*b.left_act(xi.inverse(tau), p)));
        vals(tau) = w * acc;
    }
    return AlgebraElement(b.left_groupoid(), std::move(vals));
}

ImprimitivityReport check_imprimitivity(const BitorsorPtr& b, int samples, unsigned seed,
                                        double tolerance) {
    if (!b) throw StructuralError("imprimitivity check needs a bitorsor");
    const ActionGroupoid& xi = *b->left_groupoid();
    const ActionGroupoid& theta = *b->right_groupoid();
    if (!theta.action().is_effective())
        throw ContractError("imprimitivity check requires an effective right action");
    if (!xi.action().is_effective())
        throw ContractError("imprimitivity check requires an effective left action");
    if (samples <= 0) throw ContractError("sample count must be positive");

    ImprimitivityReport report;
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_section = [&]() {
        Vector v(b->q_count());
        for (int q = 0; q < b->q_count(); ++q) v(q) = Complex(gauss(rng), gauss(rng));
        return BimoduleElement(b, std::move(v));
    };
    auto random_algebra = [&](const GroupoidPtr& gpd) {
        Vector v(gpd->arrows());
        for (int a = 0; a < gpd->arrows(); ++a) v(a) = Complex(gauss(rng), gauss(rng));
        return AlgebraElement(gpd, std::move(v));
    };

    double min_eig_theta = 0.0;
    double min_eig_xi = 0.0;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        BimoduleElement f1 = random_section();
        BimoduleElement f2 = random_section();
        BimoduleElement f3 = random_section();
        AlgebraElement a = random_algebra(b->right_groupoid());
        AlgebraElement c = random_algebra(b->left_groupoid());

        report.hermitian_theta =
            std::max(report.hermitian_theta,
                     involution(pairing_theta(f1, f2)).max_abs_diff(pairing_theta(f2, f1)));
        report.hermitian_xi =
            std::max(report.hermitian_xi,
                     involution(pairing_xi(f1, f2)).max_abs_diff(pairing_xi(f2, f1)));
        report.right_associativity =
            std::max(report.right_associativity,
                     pairing_theta(f1, right_action(f2, a))
                         .max_abs_diff(convolve(pairing_theta(f1, f2), a)));
        report.left_associativity =
            std::max(report.left_associativity,
                     pairing_xi(left_action(c, f1), f2)
                         .max_abs_diff(convolve(c, pairing_xi(f1, f2))));
        report.compatibility =
            std::max(report.compatibility,
                     left_action(pairing_xi(f1, f2), f3)
                         .max_abs_diff(right_action(f1, pairing_theta(f2, f3))));
        report.action_commutation =
            std::max(report.action_commutation,
                     right_action(left_action(c, f1), a)
                         .max_abs_diff(left_action(c, right_action(f1, a))));

        auto floor_of = [](const AlgebraElement& g) {
            Matrix rep = left_regular_rep(g);
            Eigen::SelfAdjointEigenSolver<Matrix> es((rep + rep.adjoint()) / 2.0);
            return es.eigenvalues().minCoeff();
        };
        double ft = floor_of(pairing_theta(f1, f1));
        double fx = floor_of(pairing_xi(f1, f1));
        if (first) {
            min_eig_theta = ft;
            min_eig_xi = fx;
            first = false;
        } else {
            min_eig_theta = std::min(min_eig_theta, ft);
            min_eig_xi = std::min(min_eig_xi, fx);
        }
    }
    report.positivity_floor_theta = min_eig_theta;
    report.positivity_floor_xi = min_eig_xi;

    // Fullness: the pairings of delta sections span the whole algebras.
    {
        std::vector<Vector> rows_theta;
        std::vector<Vector> rows_xi;
        for (int p = 0; p < b->q_count(); ++p)
            for (int q = 0; q < b->q_count(); ++q) {
                BimoduleElement dp = delta_section(b, p);
                BimoduleElement dq = delta_section(b, q);
                rows_theta.push_back(pairing_theta(dp, dq).values());
                rows_xi.push_back(pairing_xi(dp, dq).values());
            }
        auto rank_of = [](const std::vector<Vector>& rows) {
            Matrix m(static_cast<int>(rows.size()), rows.front().size());
            for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<int>(i)) = rows[i];
            return static_cast<int>(numeric_rank(m));
        };
        report.span_dim_theta = rank_of(rows_theta);
        report.span_dim_xi = rank_of(rows_xi);
    }

    const double positivity_tol = 1e-10;
    auto fail = [&](const std::string& why) {
        report.passed = false;
        report.failure = why;
    };
    report.passed = true;
    if (report.hermitian_theta > tolerance) fail("theta pairing is not hermitian");
    else if (report.hermitian_xi > tolerance) fail("xi pairing is not hermitian");
    else if (report.right_associativity > tolerance) fail("theta pairing is not right associative");
    else if (report.left_associativity > tolerance) fail("xi pairing is not left associative");
    else if (report.compatibility > tolerance) fail("the two pairings are incompatible");
    else if (report.action_commutation > tolerance) fail("module actions do not commute");
    else if (report.positivity_floor_theta < -positivity_tol) fail("theta pairing is not positive");
    else if (report.positivity_floor_xi < -positivity_tol) fail("xi pairing is not positive");
    else if (report.span_dim_theta != theta.arrows()) fail("theta pairing is not full");
    else if (report.span_dim_xi != xi.arrows()) fail("xi pairing is not full");
    return report;
}

}  // namespace ncorb
