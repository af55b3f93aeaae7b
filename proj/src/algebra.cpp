#include "ncorb/algebra.hpp"

namespace ncorb {

namespace {

void require_same(const AlgebraElement& f, const AlgebraElement& g) {
    if (f.groupoid().get() != g.groupoid().get())
        throw StructuralError("algebra elements live over different groupoids");
}

}  // namespace

AlgebraElement::AlgebraElement(GroupoidPtr groupoid, Vector values)
    : groupoid_(std::move(groupoid)), values_(std::move(values)) {
    if (!groupoid_) throw StructuralError("algebra element needs a groupoid");
    if (values_.size() != groupoid_->arrows())
        throw StructuralError("algebra element needs one value per arrow");
}

AlgebraElement::AlgebraElement(GroupoidPtr groupoid)
    : AlgebraElement(groupoid, Vector::Zero(groupoid ? groupoid->arrows() : 0)) {}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& other) const {
    require_same(*this, other);
    return AlgebraElement(groupoid_, values_ + other.values_);
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& other) const {
    require_same(*this, other);
    return AlgebraElement(groupoid_, values_ - other.values_);
}

AlgebraElement AlgebraElement::operator*(Complex scalar) const {
    return AlgebraElement(groupoid_, values_ * scalar);
}

double AlgebraElement::max_abs_diff(const AlgebraElement& other) const {
    require_same(*this, other);
    return (values_ - other.values_).cwiseAbs().maxCoeff();
}

AlgebraElement convolve(const AlgebraElement& f, const AlgebraElement& g) {
    require_same(f, g);
    const auto& gpd = *f.groupoid();
    const auto& grp = gpd.group();
    const double w = gpd.weight();
    Vector out = Vector::Zero(gpd.arrows());
    for (int gp = 0; gp < grp.order(); ++gp) {
        for (int x = 0; x < gpd.points(); ++x) {
            Complex sum = 0.0;
            for (int h = 0; h < grp.order(); ++h) {
                sum += f(grp.multiply(gp, grp.inverse(h)), gpd.action().apply(h, x)) * g(h, x);
            }
            out(gpd.arrow_id(gp, x)) = w * sum;
        }
    }
    return AlgebraElement(f.groupoid(), std::move(out));
}

AlgebraElement unit_element(const GroupoidPtr& groupoid) {
    AlgebraElement out(groupoid);
    const Complex scale = groupoid->haar() == HaarConvention::Counting
                              ? 1.0
                              : static_cast<double>(groupoid->group().order());
    for (int x = 0; x < groupoid->points(); ++x)
        out.set(groupoid->group().identity(), x, scale);
    return out;
}

AlgebraElement involution(const AlgebraElement& f) {
    const auto& gpd = *f.groupoid();
    Vector out(gpd.arrows());
    for (int a = 0; a < gpd.arrows(); ++a) out(a) = std::conj(f(gpd.inverse(a)));
    return AlgebraElement(f.groupoid(), std::move(out));
}

AlgebraElement delta_element(const GroupoidPtr& groupoid, int g, int x) {
    AlgebraElement out(groupoid);
    out.set(g, x, 1.0);
    return out;
}

AlgebraElement embed_point_function(const GroupoidPtr& groupoid, const Vector& values_on_points) {
    if (values_on_points.size() != groupoid->points())
        throw StructuralError("point function has wrong length");
    // Scaled like the unit so that the crossed representation acts by plain
    // pointwise multiplication under either convention.
    const Complex scale = groupoid->haar() == HaarConvention::Counting
                              ? 1.0
                              : static_cast<double>(groupoid->group().order());
    AlgebraElement out(groupoid);
    for (int x = 0; x < groupoid->points(); ++x)
        out.set(groupoid->group().identity(), x, scale * values_on_points(x));
    return out;
}

std::vector<AlgebraElement> invariant_subalgebra_basis(const GroupoidPtr& groupoid) {
    std::vector<AlgebraElement> out;
    for (const auto& orbit : groupoid->action().orbits()) {
        Vector indicator = Vector::Zero(groupoid->points());
        for (int x : orbit) indicator(x) = 1.0;
        out.push_back(embed_point_function(groupoid, indicator));
    }
    return out;
}

Matrix left_regular_rep(const AlgebraElement& f) {
    const auto& gpd = *f.groupoid();
    const auto& grp = gpd.group();
    const double w = gpd.weight();
    Matrix m = Matrix::Zero(gpd.arrows(), gpd.arrows());
    // (f*u)(g', x) = w sum_h f(g' h^{-1}, h.x) u(h, x)
    for (int gp = 0; gp < grp.order(); ++gp)
        for (int x = 0; x < gpd.points(); ++x)
            for (int h = 0; h < grp.order(); ++h)
                m(gpd.arrow_id(gp, x), gpd.arrow_id(h, x)) +=
                    w * f(grp.multiply(gp, grp.inverse(h)), gpd.action().apply(h, x));
    return m;
}

double algebra_norm(const AlgebraElement& f) { return operator_norm(left_regular_rep(f)); }

Complex fiber_sum_after_translation(const AlgebraElement& f, int sigma) {
    const auto& gpd = *f.groupoid();
    Complex sum = 0.0;
    for (int tau : gpd.target_fiber(gpd.source(sigma)))
        sum += f(compose_arrows(gpd, sigma, tau));
    return gpd.weight() * sum;
}

Complex fiber_sum_target(const AlgebraElement& f, int sigma) {
    const auto& gpd = *f.groupoid();
    Complex sum = 0.0;
    for (int tau : gpd.target_fiber(gpd.target(sigma))) sum += f(tau);
    return gpd.weight() * sum;
}

}  // namespace ncorb
