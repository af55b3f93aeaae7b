#pragma once

#include "ncorb/groupoid.hpp"
#include "ncorb/linalg.hpp"

namespace ncorb {

/// An element of the groupoid convolution algebra: one complex value per
/// arrow, indexed by the groupoid's arrow ids.
class AlgebraElement {
public:
    AlgebraElement(GroupoidPtr groupoid, Vector values);
    /// The zero element.
    explicit AlgebraElement(GroupoidPtr groupoid);

    const GroupoidPtr& groupoid() const { return groupoid_; }
    const Vector& values() const { return values_; }
    Complex operator()(int arrow) const { return values_(arrow); }
    Complex operator()(int g, int x) const { return values_(groupoid_->arrow_id(g, x)); }
    void set(int g, int x, Complex v) { values_(groupoid_->arrow_id(g, x)) = v; }

    AlgebraElement operator+(const AlgebraElement& other) const;
    AlgebraElement operator-(const AlgebraElement& other) const;
    AlgebraElement operator*(Complex scalar) const;
    double max_abs_diff(const AlgebraElement& other) const;

private:
    GroupoidPtr groupoid_;
    Vector values_;
};

/// Convolution product.  Under the groupoid's Haar convention the value at
/// (g', x) is weight * sum_h f(g' h^{-1}, h.x) g(h, x).
AlgebraElement convolve(const AlgebraElement& f, const AlgebraElement& g);

/// The multiplicative unit: the indicator of the identity arrows, scaled so
/// that unit * f = f under the groupoid's convention (scale #G when
/// Normalized).
AlgebraElement unit_element(const GroupoidPtr& groupoid);

/// The *-involution f*(sigma) = conj(f(sigma^{-1})).
AlgebraElement involution(const AlgebraElement& f);

/// Dirac delta at a single arrow.
AlgebraElement delta_element(const GroupoidPtr& groupoid, int g, int x);

/// Orbit-indicator functions supported on the identity arrows, one per
/// G-orbit on the point set.  They span the invariant subalgebra.
std::vector<AlgebraElement> invariant_subalgebra_basis(const GroupoidPtr& groupoid);

/// Embed a function on points as an element supported on identity arrows.
AlgebraElement embed_point_function(const GroupoidPtr& groupoid, const Vector& values_on_points);

/// Matrix of left convolution u -> f * u on the arrow space.  This is a
/// faithful *-representation for the plain arrow inner product under either
/// convention, and is what algebra_norm uses.
Matrix left_regular_rep(const AlgebraElement& f);

/// Operator norm of f in the left regular representation.
double algebra_norm(const AlgebraElement& f);

/// Weighted fiber sum of f(sigma tau) over tau in the s-fiber at s(sigma),
/// and of f(tau) over the t-fiber at t(sigma).  Left invariance of the Haar
/// system says the two agree; exposed for tests.
Complex fiber_sum_after_translation(const AlgebraElement& f, int sigma);
Complex fiber_sum_target(const AlgebraElement& f, int sigma);

}  // namespace ncorb
