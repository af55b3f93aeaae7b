// Acceptance harness: one criterion per line, PASS or FAIL, exit code is the
// number of failures.  Tolerances are pinned here on purpose; loosening them
// is a behavior change, not a cleanup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ncorb/distance.hpp"
#include "ncorb/morita.hpp"

using namespace ncorb;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Check {
    bool ok = true;
    std::string why;
    void require(bool cond, const std::string& msg) {
        if (!cond && ok) {
            ok = false;
            why = msg;
        }
    }
};

AlgebraElement random_element(const GroupoidPtr& gpd, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    Vector v(gpd->arrows());
    for (int i = 0; i < gpd->arrows(); ++i) v(i) = Complex(nd(rng), nd(rng));
    return AlgebraElement(gpd, std::move(v));
}

std::vector<GroupAction> algebra_fixtures() {
    return {GroupAction::reflection_cycle(6), GroupAction::rotation_cycle(6, 2),
            GroupAction::left_translation(FiniteGroup::s3())};
}

const HaarConvention kBoth[] = {HaarConvention::Counting, HaarConvention::Normalized};

void criterion_algebra(Check& c) {
    for (HaarConvention haar : kBoth)
        for (const GroupAction& action : algebra_fixtures()) {
            GroupoidPtr gpd = make_groupoid(action, haar);
            AlgebraElement unit = unit_element(gpd);
            std::mt19937 rng(31);
            for (int trial = 0; trial < 100; ++trial) {
                AlgebraElement a = random_element(gpd, rng);
                AlgebraElement b = random_element(gpd, rng);
                AlgebraElement d = random_element(gpd, rng);
                c.require(convolve(convolve(a, b), d)
                                  .max_abs_diff(convolve(a, convolve(b, d))) <= 1e-12,
                          "associativity residual above 1e-12");
                c.require(convolve(unit, a).max_abs_diff(a) <= 1e-12 &&
                              convolve(a, unit).max_abs_diff(a) <= 1e-12,
                          "unit law residual above 1e-12");
                c.require(involution(involution(a)).max_abs_diff(a) <= 1e-12,
                          "involution is not involutive");
                c.require(involution(convolve(a, b))
                                  .max_abs_diff(convolve(involution(b), involution(a))) <=
                              1e-12,
                          "involution antihomomorphism residual above 1e-12");
            }
        }
}

void criterion_fibers(Check& c) {
    for (HaarConvention haar : kBoth) {
        GroupoidPtr refl = make_groupoid(GroupAction::reflection_cycle(6), haar);
        MoritaBitorsor idb = identity_bitorsor(refl);
        c.require(validate_bitorsor(idb).passed(), "identity bitorsor axioms fail");
        FiberCardinalities idf = fiber_cardinalities(idb);
        for (int v : idf.rho_fibers) c.require(v == 2, "identity rho fiber is not #G");
        for (int v : idf.alpha_fibers)
            c.require(v == 2, "identity alpha fiber is not #G");

        GroupoidPtr rot = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        MoritaBitorsor qb = quotient_bitorsor(rot);
        c.require(validate_bitorsor(qb).passed(), "quotient bitorsor axioms fail");
        FiberCardinalities qf = fiber_cardinalities(qb);
        c.require(static_cast<int>(qf.alpha_fibers.size()) == 3,
                  "quotient has the wrong orbit count");
        for (int v : qf.rho_fibers) c.require(v == 1, "quotient rho fiber is not #K");
        for (int v : qf.alpha_fibers)
            c.require(v == 2, "quotient alpha fiber is not #G");
    }
}

void criterion_imprimitivity(Check& c) {
    for (HaarConvention haar : kBoth) {
        GroupoidPtr refl = make_groupoid(GroupAction::reflection_cycle(6), haar);
        GroupoidPtr rot = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        BitorsorPtr fixtures[] = {
            std::make_shared<const MoritaBitorsor>(identity_bitorsor(refl)),
            std::make_shared<const MoritaBitorsor>(quotient_bitorsor(rot))};
        for (const BitorsorPtr& b : fixtures) {
            ImprimitivityReport r = check_imprimitivity(b, 40, 7, 1e-10);
            c.require(r.passed, "imprimitivity: " + r.failure);
            c.require(r.hermitian_theta <= 1e-12 && r.hermitian_xi <= 1e-12,
                      "pairing hermiticity residual above 1e-12");
            c.require(r.right_associativity <= 1e-12 && r.left_associativity <= 1e-12,
                      "pairing associativity residual above 1e-12");
            c.require(r.compatibility <= 1e-12 && r.action_commutation <= 1e-12,
                      "pairing compatibility residual above 1e-12");
            c.require(r.positivity_floor_theta >= -1e-10 &&
                          r.positivity_floor_xi >= -1e-10,
                      "pairing positivity floor below -1e-10");
            const ActionGroupoid& theta = *b->right_groupoid();
            const ActionGroupoid& xi = *b->left_groupoid();
            c.require(r.span_dim_theta == theta.group().order() * theta.points(),
                      "Theta pairing span is not full");
            c.require(r.span_dim_xi == xi.group().order() * xi.points(),
                      "Xi pairing span is not full");
        }
    }
}

void criterion_chi(Check& c) {
    for (HaarConvention haar : kBoth) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InducedHilbert h = induced_space(inst.bitorsor, inst.right_triple.bundle_ptr(),
                                         inst.right_triple.dirac().nu());
        ChiIso iso = chi_iso(h, 200, 11);
        c.require(iso.rank == h.dim, "chi is not injective on the induced space");
        c.require(iso.null_residual <= 1e-10, "chi does not kill the null space");
        c.require(iso.intertwining_residual <= 1e-10,
                  "chi intertwining residual above 1e-10");
        c.require(iso.ratio_deviation <= 1e-10, "chi ratio deviation above 1e-10");
        double expected = haar == HaarConvention::Counting ? 1.0 : 0.5;
        c.require(std::abs(iso.predicted_scale - expected) <= 1e-12 &&
                      std::abs(iso.measured_scale - expected) <= 1e-10,
                  "chi scale is off its convention value");
    }
}

void criterion_prop5(Check& c) {
    for (HaarConvention haar : kBoth) {
        Prop5Report rep = verify_prop5({16, 32, 64}, haar, 5);
        c.require(rep.constant_residual == 0.0,
                  "constant section defect is not exactly zero");
        c.require(rep.ratios_in_band, "defect ratios leave [0.3, 0.7]");
        for (double r : rep.tent_ratios)
            c.require(r >= 0.3 && r <= 0.7, "a tent ratio leaves [0.3, 0.7]");
    }
}

void criterion_morita(Check& c) {
    for (HaarConvention haar : kBoth) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        MoritaReport rep = full_report(inst, 60, 1, 1e-10);
        c.require(rep.passed, "quotient report: " + rep.failure);
        c.require(std::abs(rep.m5.scale - std::sqrt(2.0)) <= 1e-10,
                  "quotient invariant scale is not sqrt(2)");

        MoritaReport refl = full_report(reflexive_instance(inst.right_triple), 60, 1,
                                        1e-10);
        c.require(refl.passed, "reflexive report: " + refl.failure);
        c.require(std::abs(refl.m5.scale - 1.0) <= 1e-10,
                  "reflexive invariant scale is not one");

        const BitorsorPtr& b = inst.bitorsor;
        auto dual = std::make_shared<const MoritaBitorsor>(dual_bitorsor(b));
        MoritaBitorsor over_xi = compose_bitorsors(b, dual);
        MoritaBitorsor over_theta = compose_bitorsors(dual, b);
        c.require(validate_bitorsor(over_xi).passed() &&
                      validate_bitorsor(over_theta).passed(),
                  "a composed bitorsor fails its axioms");
        c.require(bitorsor_isomorphism(over_xi,
                                       identity_bitorsor(b->left_groupoid()))
                      .has_value(),
                  "b composed with its dual is not the identity bitorsor");
        c.require(bitorsor_isomorphism(over_theta,
                                       identity_bitorsor(b->right_groupoid()))
                      .has_value(),
                  "the dual composed with b is not the identity bitorsor");
    }
}

void criterion_spectrum(Check& c) {
    for (HaarConvention haar : kBoth) {
        MoritaInstance inst = rotation_quotient_instance(6, 1, haar);
        InvariantTriple inv = invariant_triple(inst.right_triple);
        Eigen::SelfAdjointEigenSolver<Matrix> es(inv.dirac);
        std::vector<double> invariant(es.eigenvalues().data(),
                                      es.eigenvalues().data() + es.eigenvalues().size());
        RealVector qs = spectrum(inst.left_triple.dirac());
        std::vector<double> quotient(qs.data(), qs.data() + qs.size());
        c.require(multiset_distance(invariant, quotient) <= 1e-10,
                  "invariant and quotient spectra disagree beyond 1e-10");
    }
    SmoothnessVerdict rot = smoothness_verdict(GroupAction::rotation_cycle(6, 2));
    c.require(rot.smooth && rot.singular_vertices.empty(),
              "free rotation is not reported smooth");
    SmoothnessVerdict refl = smoothness_verdict(GroupAction::reflection_cycle(6));
    c.require(!refl.smooth && refl.singular_vertices == std::vector<int>{0, 3},
              "reflection singular vertices are not {0, 3}");
    DiscreteOrbifold orb(refine_circle(6, 2.0 * kPi), GroupAction::reflection_cycle(6));
    SingularLocus locus = singular_locus(orb);
    c.require(locus.vertices.size() == 2 && locus.vertices[0].first == 0 &&
                  locus.vertices[1].first == 3 && locus.pointlike,
              "the reflection singular locus is not the pointlike pair {0, 3}");
}

void criterion_convergence(Check& c) {
    Theorem3Report rep = theorem3_harness({16, 32, 64, 128, 256},
                                          HaarConvention::Counting);
    c.require(rep.passed, "harness: " + rep.failure);
    for (const Theorem3Endpoint* ep : {&rep.antipodal, &rep.adjacent}) {
        c.require(ep->converged, ep->label + " endpoint did not converge");
        c.require(ep->trend_violations <= 1,
                  ep->label + " relative error rises more than once");
        c.require(!ep->rows.empty() && ep->rows.back().rel_error <= 0.10,
                  ep->label + " relative error at the finest size exceeds 10%");
    }
    c.require(rep.companion_residual <= 1e-8,
              "rotation companion distance misses the quotient circle");
}

void criterion_m3_family(Check& c) {
    M3FamilyReport fam = check_m3_family({16, 32, 64, 128}, 2,
                                         HaarConvention::Counting, 1.1);
    c.require(fam.passed, "family: " + fam.failure);
    for (double r : fam.defect_ratios)
        c.require(r <= 1.1, "a defect ratio exceeds 1.1 per doubling");
    for (double r : fam.norm_ratios)
        c.require(std::abs(r - 2.0) <= 1e-9,
                  "the operator norm does not double under refinement");
}

void criterion_metric(Check& c) {
    struct Fixture {
        int n;
        GroupAction action;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({6, GroupAction::reflection_cycle(6)});
    fixtures.push_back({6, GroupAction::rotation_cycle(6, 2)});
    fixtures.push_back({6, GroupAction::s3_on_c6()});
    fixtures.push_back({12, GroupAction::rotation_cycle(12, 3)});
    for (const Fixture& fix : fixtures) {
        DiscreteOrbifold orb(refine_circle(fix.n, 2.0 * kPi), fix.action);
        const int n = fix.n;
        std::vector<std::vector<double>> d(static_cast<size_t>(n),
                                           std::vector<double>(static_cast<size_t>(n)));
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                d[static_cast<size_t>(x)][static_cast<size_t>(y)] =
                    orbifold_distance(orb, x, y);
        std::vector<std::vector<double>> ambient;
        for (int x = 0; x < n; ++x) ambient.push_back(orb.graph().shortest_paths(x));
        const MetricGraph& quotient = orb.quotient_graph();
        const std::vector<int>& orbit = orb.orbit_index();
        std::vector<std::vector<double>> down;
        for (int o = 0; o < quotient.vertex_count(); ++o)
            down.push_back(quotient.shortest_paths(o));
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                double dxy = d[static_cast<size_t>(x)][static_cast<size_t>(y)];
                c.require(dxy >= 0.0, "a distance is negative");
                c.require(std::abs(dxy - d[static_cast<size_t>(y)][static_cast<size_t>(
                                             x)]) <= 1e-12,
                          "the distance is not symmetric");
                bool same_orbit = orbit[static_cast<size_t>(x)] ==
                                  orbit[static_cast<size_t>(y)];
                c.require(same_orbit == (dxy <= 1e-12),
                          "distance vanishes off the diagonal of orbits");
                for (int z = 0; z < n; ++z)
                    c.require(dxy <= d[static_cast<size_t>(x)][static_cast<size_t>(z)] +
                                         d[static_cast<size_t>(z)][static_cast<size_t>(
                                             y)] +
                                         1e-12,
                              "the triangle inequality fails");
                // Formulation one: minimum over group translates upstairs.
                double over_g = ambient[static_cast<size_t>(x)][static_cast<size_t>(y)];
                for (int g = 0; g < fix.action.group().order(); ++g) {
                    int gy = fix.action.apply(g, y);
                    over_g = std::min(over_g,
                                      ambient[static_cast<size_t>(x)][static_cast<size_t>(
                                          gy)]);
                }
                // Formulation two: Dijkstra on the quotient graph.
                double downstairs = down[static_cast<size_t>(
                    orbit[static_cast<size_t>(x)])][static_cast<size_t>(
                    orbit[static_cast<size_t>(y)])];
                c.require(std::abs(over_g - dxy) <= 1e-12,
                          "the translate formulation disagrees");
                c.require(std::abs(downstairs - dxy) <= 1e-12,
                          "the quotient formulation disagrees");
            }
    }
}

struct Criterion {
    const char* label;
    double budget_seconds;
    std::function<void(Check&)> run;
};

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"groupoid algebra laws", 5.0, criterion_algebra},
        {"bitorsor fiber cardinalities", 1.0, criterion_fibers},
        {"imprimitivity bimodule axioms", 30.0, criterion_imprimitivity},
        {"chi comparison isometry", 30.0, criterion_chi},
        {"first order commutator defects", 60.0, criterion_prop5},
        {"full Morita report", 120.0, criterion_morita},
        {"invariant versus quotient spectrum", 30.0, criterion_spectrum},
        {"spectral-geodesic convergence", 600.0, criterion_convergence},
        {"bounded defects under refinement", 300.0, criterion_m3_family},
        {"orbit metric axioms and formulations", 5.0, criterion_metric},
    };
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Check check;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].run(check);
        } catch (const std::exception& e) {
            check.require(false, std::string("exception: ") + e.what());
        }
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
        if (check.ok && elapsed > criteria[i].budget_seconds) {
            check.ok = false;
            check.why = "exceeded the time budget";
        }
        if (!check.ok) ++failures;
        std::printf("[%s] criterion %zu: %s (%.2fs)%s%s\n", check.ok ? "PASS" : "FAIL",
                    i + 1, criteria[i].label, elapsed, check.ok ? "" : " -- ",
                    check.ok ? "" : check.why.c_str());
    }
    return failures;
}
