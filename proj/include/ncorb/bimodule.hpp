#pragma once

#include <string>
#include <vector>

#include "ncorb/algebra.hpp"
#include "ncorb/bitorsor.hpp"

namespace ncorb {

/// A section of the equivalence bimodule: one complex value per torsor
/// point.  Left module over C[Xi], right module over C[Theta], with the two
/// groupoid-valued pairings.
class BimoduleElement {
public:
    BimoduleElement(BitorsorPtr bitorsor, Vector values);
    explicit BimoduleElement(BitorsorPtr bitorsor);

    const BitorsorPtr& bitorsor() const { return bitorsor_; }
    const Vector& values() const { return values_; }
    Complex operator()(int q) const { return values_(q); }
    void set(int q, Complex v) { values_(q) = v; }

    BimoduleElement operator+(const BimoduleElement& other) const;
    BimoduleElement operator-(const BimoduleElement& other) const;
    BimoduleElement operator*(Complex scalar) const;
    double max_abs_diff(const BimoduleElement& other) const;

private:
    BitorsorPtr bitorsor_;
    Vector values_;
};

/// Delta section at one torsor point.
BimoduleElement delta_section(const BitorsorPtr& bitorsor, int q);

/// (f . a)(q) = w_Theta * sum over sigma with t(sigma) = rho(q) of
/// a(sigma^{-1}) f(q . sigma).  On the identity bitorsor this is convolution
/// from the right.
BimoduleElement right_action(const BimoduleElement& f, const AlgebraElement& a);

/// (b . f)(q) = w_Xi * sum over tau with t(tau) = alpha(q) of
/// b(tau) f(tau^{-1} . q).
BimoduleElement left_action(const AlgebraElement& b, const BimoduleElement& f);

/// Theta-valued pairing: <f1, f2>_Theta(sigma) = w_Xi * sum over the rho
/// fiber of t(sigma) of conj(f1(p)) f2(p . sigma).  The fiber sum equals the
/// left-action parametrization at any base point of the fiber, which is the
/// q-independence the tests exercise.
AlgebraElement pairing_theta(const BimoduleElement& f1, const BimoduleElement& f2);

/// Xi-valued pairing: <f1, f2>_Xi(tau) = w_Theta * sum over the alpha fiber
/// of t(tau) of f1(p) conj(f2(tau^{-1} . p)).
AlgebraElement pairing_xi(const BimoduleElement& f1, const BimoduleElement& f2);

/// <f1, f2>_Theta evaluated through the base point q of the rho fiber over
/// t(sigma); equals pairing_theta at every choice of q.  Exposed for tests.
Complex pairing_theta_at(const BimoduleElement& f1, const BimoduleElement& f2, int sigma,
                         int q);

struct ImprimitivityReport {
    // Max residuals over the sampled elements.
    double hermitian_theta = 0.0;       // <f,g>* vs <g,f>
    double hermitian_xi = 0.0;
    double right_associativity = 0.0;   // <f, g.a> vs <f,g>.a
    double left_associativity = 0.0;    // <b.f, g> vs b.<f,g>
    double compatibility = 0.0;         // <f1,f2>_Xi . f3 vs f1 . <f2,f3>_Theta
    double action_commutation = 0.0;    // (b.f).a vs b.(f.a)
    double positivity_floor_theta = 0.0;  // min eigenvalue seen, >= 0 up to tolerance
    double positivity_floor_xi = 0.0;
    int span_dim_theta = 0;  // expected #G * |X|
    int span_dim_xi = 0;     // expected #K * |Y|
    bool passed = false;
    std::string failure;
};

/// Samples random sections and algebra elements, checks the imprimitivity
/// bimodule axioms, the positivity of both pairings in the left regular
/// representation, and the fullness of both pairings by exhaustive delta
/// spans.  Requires both actions to be effective.
ImprimitivityReport check_imprimitivity(const BitorsorPtr& b, int samples, unsigned seed,
                                        double tolerance);

}  // namespace ncorb
