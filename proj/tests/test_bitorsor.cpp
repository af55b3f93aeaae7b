#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <set>
#include <vector>

#include "ncorb/bitorsor.hpp"
#include "ncorb/orbifold.hpp"

using namespace ncorb;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Tables {
    std::vector<int> alpha, rho;
    std::vector<std::vector<int>> lact, ract;
};

Tables dump(const MoritaBitorsor& b) {
    Tables t;
    const int q_count = b.q_count();
    for (int q = 0; q < q_count; ++q) {
        t.alpha.push_back(b.alpha(q));
        t.rho.push_back(b.rho(q));
    }
    t.lact.assign(static_cast<size_t>(b.left_groupoid()->arrows()),
                  std::vector<int>(static_cast<size_t>(q_count), -1));
    t.ract.assign(static_cast<size_t>(b.right_groupoid()->arrows()),
                  std::vector<int>(static_cast<size_t>(q_count), -1));
    for (int a = 0; a < b.left_groupoid()->arrows(); ++a)
        for (int q = 0; q < q_count; ++q)
            if (auto img = b.left_act(a, q))
                t.lact[static_cast<size_t>(a)][static_cast<size_t>(q)] = *img;
    for (int a = 0; a < b.right_groupoid()->arrows(); ++a)
        for (int q = 0; q < q_count; ++q)
            if (auto img = b.right_act(q, a))
                t.ract[static_cast<size_t>(a)][static_cast<size_t>(q)] = *img;
    return t;
}

MoritaBitorsor rebuild(const MoritaBitorsor& b, const Tables& t) {
    return MoritaBitorsor(b.left_groupoid(), b.right_groupoid(), b.q_count(), t.alpha,
                          t.rho, t.lact, t.ract, b.explicit_q_edges());
}

}  // namespace

TEST_CASE("identity and quotient bitorsors satisfy every axiom") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        GroupoidPtr rotation = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        GroupoidPtr reflection = make_groupoid(GroupAction::reflection_cycle(6), haar);
        for (const MoritaBitorsor& b :
             {identity_bitorsor(rotation), identity_bitorsor(reflection),
              quotient_bitorsor(rotation)}) {
            ValidationReport report = validate_bitorsor(b);
            for (const ValidationEntry& e : report.entries) {
                INFO(e.axiom << ": " << e.witness);
                CHECK(e.passed);
            }
            CHECK(report.passed());
            CHECK(report.first_failure().empty());
            CHECK_NOTHROW(ensure_valid(b));
        }
    }
}

TEST_CASE("quotient bitorsors need free actions") {
    GroupoidPtr reflection = make_groupoid(GroupAction::reflection_cycle(6),
                                           HaarConvention::Counting);
    CHECK_THROWS_AS(quotient_bitorsor(reflection), ContractError);
}

TEST_CASE("fiber cardinalities match the group orders") {
    GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(6, 2),
                                      HaarConvention::Counting);
    MoritaBitorsor q = quotient_bitorsor(theta);
    FiberCardinalities fibers = fiber_cardinalities(q);
    REQUIRE(fibers.rho_fibers.size() == 6);
    REQUIRE(fibers.alpha_fibers.size() == 3);
    for (int c : fibers.rho_fibers) CHECK(c == 1);   // #K for the trivial quotient base
    for (int c : fibers.alpha_fibers) CHECK(c == 2);  // #G

    MoritaBitorsor id = identity_bitorsor(theta);
    FiberCardinalities id_fibers = fiber_cardinalities(id);
    for (int c : id_fibers.rho_fibers) CHECK(c == 2);
    for (int c : id_fibers.alpha_fibers) CHECK(c == 2);
}

TEST_CASE("single-entry mutations are caught with witnesses") {
    GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(6, 2),
                                      HaarConvention::Counting);
    MoritaBitorsor base = quotient_bitorsor(theta);
    Tables good = dump(base);

    // Redirect one right-action image.
    {
        Tables bad = good;
        for (auto& row : bad.ract) {
            bool changed = false;
            for (size_t q = 0; q < row.size(); ++q)
                if (row[q] >= 0 && row[q] != static_cast<int>(q)) {
                    row[q] = static_cast<int>(q);
                    changed = true;
                    break;
                }
            if (changed) break;
        }
        ValidationReport report = validate_bitorsor(rebuild(base, bad));
        CHECK_FALSE(report.passed());
        CHECK_FALSE(report.first_failure().empty());
    }
    // Break an anchor.
    {
        Tables bad = good;
        bad.alpha[0] = (bad.alpha[0] + 1) % 3;
        ValidationReport report = validate_bitorsor(rebuild(base, bad));
        CHECK_FALSE(report.passed());
    }
    // Forget one defined left action entry.
    {
        Tables bad = good;
        bool changed = false;
        for (auto& row : bad.lact) {
            for (auto& v : row)
                if (v >= 0) {
                    v = -1;
                    changed = true;
                    break;
                }
            if (changed) break;
        }
        REQUIRE(changed);
        ValidationReport report = validate_bitorsor(rebuild(base, bad));
        CHECK_FALSE(report.passed());
    }
    // The untouched tables still validate after a rebuild round trip.
    CHECK(validate_bitorsor(rebuild(base, good)).passed());
}

TEST_CASE("the dual is an involution up to isomorphism") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        auto b = std::make_shared<const MoritaBitorsor>(quotient_bitorsor(theta));
        auto d = std::make_shared<const MoritaBitorsor>(dual_bitorsor(b));
        CHECK(d->kind() == BitorsorKind::Dual);
        CHECK(d->left_groupoid().get() == b->right_groupoid().get());
        CHECK(d->right_groupoid().get() == b->left_groupoid().get());
        CHECK(validate_bitorsor(*d).passed());
        MoritaBitorsor dd = dual_bitorsor(d);
        auto iso = bitorsor_isomorphism(dd, *b);
        REQUIRE(iso.has_value());
        // The isomorphism is a bijection on torsor points.
        std::set<int> image(iso->begin(), iso->end());
        CHECK(static_cast<int>(image.size()) == b->q_count());
    }
}

TEST_CASE("composing with the dual collapses to the identity bitorsors") {
    for (HaarConvention haar : {HaarConvention::Counting, HaarConvention::Normalized}) {
        GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
        auto b = std::make_shared<const MoritaBitorsor>(quotient_bitorsor(theta));
        auto d = std::make_shared<const MoritaBitorsor>(dual_bitorsor(b));
        GroupoidPtr xi = b->left_groupoid();

        MoritaBitorsor left_collapse = compose_bitorsors(b, d);
        CHECK(left_collapse.kind() == BitorsorKind::Composed);
        CHECK(validate_bitorsor(left_collapse).passed());
        CHECK(bitorsor_isomorphism(left_collapse, identity_bitorsor(xi)).has_value());

        MoritaBitorsor right_collapse = compose_bitorsors(d, b);
        CHECK(validate_bitorsor(right_collapse).passed());
        CHECK(bitorsor_isomorphism(right_collapse, identity_bitorsor(theta)).has_value());

        // Mismatched middle groupoids are rejected.
        CHECK_THROWS_AS(compose_bitorsors(b, b), StructuralError);
    }
}

TEST_CASE("lifted graphs cover both bases") {
    GroupoidPtr theta = make_groupoid(GroupAction::rotation_cycle(6, 2),
                                      HaarConvention::Counting);
    MetricGraph x_graph = refine_circle(6, 2.0 * kPi);
    auto b = std::make_shared<const MoritaBitorsor>(quotient_bitorsor(theta));
    DiscreteOrbifold orb(x_graph, theta->action());
    const MetricGraph& y_graph = orb.quotient_graph();

    CoveringGraph lifted = lift_graph(*b, x_graph, y_graph);
    CHECK(lifted.vertex_count() == 6);
    CHECK(lifted.edges().size() == x_graph.edges().size());

    // The identity bitorsor lifts to one sheet per group element; the result
    // is disconnected, which CoveringGraph must tolerate.
    MoritaBitorsor id = identity_bitorsor(theta);
    CoveringGraph sheets = lift_graph(id, x_graph, x_graph);
    CHECK(sheets.vertex_count() == id.q_count());
    CHECK(sheets.edges().size() == 2 * x_graph.edges().size());
}
