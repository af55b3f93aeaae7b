#include "ncorb/scenario.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "ncorb/algebra.hpp"
#include "ncorb/bimodule.hpp"
#include "ncorb/distance.hpp"
#include "ncorb/induction.hpp"
#include "ncorb/morita.hpp"

namespace ncorb {
namespace {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON access with contextual errors.

const Json& require_field(const Json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw StructuralError(where + ": missing field '" + key + "'");
    return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& where) {
    const Json& v = require_field(j, key, where);
    if (!v.is_string())
        throw StructuralError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

int get_int(const Json& v, const char* key, const std::string& where) {
    if (!v.is_number_integer())
        throw StructuralError(where + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

int opt_int(const Json& j, const char* key, const std::string& where, int fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : get_int(*it, key, where);
}

double opt_double(const Json& j, const char* key, const std::string& where,
                  double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number())
        throw StructuralError(where + ": field '" + key + "' must be a number");
    return it->get<double>();
}

bool opt_bool(const Json& j, const char* key, const std::string& where, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean())
        throw StructuralError(where + ": field '" + key + "' must be a boolean");
    return it->get<bool>();
}

std::string opt_string(const Json& j, const char* key, const std::string& where,
                       const std::string& fallback) {
    auto it = j.find(key);
    return it == j.end() ? fallback : get_string(j, key, where);
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw StructuralError(where + ": unknown field '" + item.key() + "'");
    }
}

// ---------------------------------------------------------------------------
// Spec parsing.

GraphSpec parse_graph(const Json& j) {
    check_keys(j, {"kind", "vertices", "circumference", "edges"}, "scenario graph");
    GraphSpec g;
    g.kind = get_string(j, "kind", "scenario graph");
    g.vertices = opt_int(j, "vertices", "scenario graph", 0);
    g.circumference = opt_double(j, "circumference", "scenario graph", 0.0);
    if (auto it = j.find("edges"); it != j.end()) {
        if (!it->is_array())
            throw StructuralError("scenario graph: field 'edges' must be an array");
        for (const Json& e : *it) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
                !e[1].is_number_integer() || !e[2].is_number())
                throw StructuralError(
                    "scenario graph: each edge must be [u, v, length]");
            g.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
        }
    }
    return g;
}

ActionSpec parse_action(const Json& j) {
    check_keys(j, {"kind", "sectors", "order", "group", "cyclic_order", "table"},
               "scenario action");
    ActionSpec a;
    a.kind = get_string(j, "kind", "scenario action");
    a.sectors = opt_int(j, "sectors", "scenario action", 2);
    a.order = opt_int(j, "order", "scenario action", 1);
    a.group = opt_string(j, "group", "scenario action", "");
    a.cyclic_order = opt_int(j, "cyclic_order", "scenario action", 2);
    if (auto it = j.find("table"); it != j.end()) {
        if (!it->is_array())
            throw StructuralError("scenario action: field 'table' must be an array");
        for (const Json& row : *it) {
            if (!row.is_array())
                throw StructuralError(
                    "scenario action: each table row must be an array");
            std::vector<int> r;
            for (const Json& v : row)
                r.push_back(get_int(v, "table", "scenario action"));
            a.table.push_back(std::move(r));
        }
    }
    return a;
}

BundleSpec parse_bundle(const Json& j) {
    check_keys(j, {"kind", "rank"}, "scenario bundle");
    BundleSpec b;
    b.kind = get_string(j, "kind", "scenario bundle");
    b.rank = opt_int(j, "rank", "scenario bundle", 1);
    return b;
}

DiracSpec parse_dirac(const Json& j) {
    check_keys(j, {"kind", "rank", "drop_grading"}, "scenario dirac");
    DiracSpec d;
    d.kind = get_string(j, "kind", "scenario dirac");
    d.rank = opt_int(j, "rank", "scenario dirac", 1);
    d.drop_grading = opt_bool(j, "drop_grading", "scenario dirac", false);
    return d;
}

BitorsorSpec parse_bitorsor(const Json& j) {
    check_keys(j, {"kind"}, "scenario bitorsor");
    BitorsorSpec b;
    b.kind = get_string(j, "kind", "scenario bitorsor");
    return b;
}

// ---------------------------------------------------------------------------
// Spec serialization (inverse of the parsers; keys come out sorted).

Json graph_json(const GraphSpec& g) {
    Json j;
    j["kind"] = g.kind;
    j["vertices"] = g.vertices;
    if (g.kind == "circle") j["circumference"] = g.circumference;
    if (!g.edges.empty()) {
        Json edges = Json::array();
        for (const Edge& e : g.edges) edges.push_back({e.u, e.v, e.length});
        j["edges"] = edges;
    }
    return j;
}

Json action_json(const ActionSpec& a) {
    Json j;
    j["kind"] = a.kind;
    if (a.kind == "rotation") j["sectors"] = a.sectors;
    if (a.kind == "trivial") j["order"] = a.order;
    if (!a.group.empty()) j["group"] = a.group;
    if (a.group == "cyclic") j["cyclic_order"] = a.cyclic_order;
    if (!a.table.empty()) j["table"] = a.table;
    return j;
}

// ---------------------------------------------------------------------------
// Builders.

FiniteGroup build_group(const ActionSpec& a) {
    if (a.group == "trivial") return FiniteGroup::trivial();
    if (a.group == "z2") return FiniteGroup::z2();
    if (a.group == "s3") return FiniteGroup::s3();
    if (a.group == "cyclic") return FiniteGroup::cyclic(a.cyclic_order);
    throw StructuralError("scenario action: unknown group '" + a.group + "'");
}

MetricGraph build_graph(const GraphSpec& g) {
    if (g.kind == "circle") return refine_circle(g.vertices, g.circumference);
    if (g.kind == "explicit") return MetricGraph(g.vertices, g.edges);
    throw StructuralError("scenario graph: unknown kind '" + g.kind + "'");
}

GroupAction build_action(const ActionSpec& a, const MetricGraph* graph) {
    auto need_points = [&]() -> int {
        if (!graph)
            throw StructuralError("scenario action '" + a.kind +
                                  "' needs a graph to fix the point count");
        return graph->vertex_count();
    };
    if (a.kind == "rotation") return GroupAction::rotation_cycle(need_points(), a.sectors);
    if (a.kind == "reflection") return GroupAction::reflection_cycle(need_points());
    if (a.kind == "trivial") return GroupAction::trivial_on(need_points(), a.order);
    if (a.kind == "s3_on_c6") return GroupAction::s3_on_c6();
    if (a.kind == "left_translation") return GroupAction::left_translation(build_group(a));
    if (a.kind == "explicit") return GroupAction(build_group(a), a.table);
    throw StructuralError("scenario action: unknown kind '" + a.kind + "'");
}

SpinorBundle build_bundle(const BundleSpec& b, const GroupoidPtr& gpd) {
    if (b.kind == "trivial") return SpinorBundle::trivial(gpd, b.rank);
    if (b.kind == "alternating") return SpinorBundle::alternating_reflection(gpd);
    if (b.kind == "parity_swap") return SpinorBundle::parity_swap(gpd);
    throw StructuralError("scenario bundle: unknown kind '" + b.kind + "'");
}

// A deliberately broken quotient bitorsor: the tables of the genuine quotient
// with one right-action image redirected.  The constructor only checks shape,
// so the damage surfaces as a validation witness, not as a build error.
MoritaBitorsor corrupted_quotient(const GroupoidPtr& theta) {
    MoritaBitorsor base = quotient_bitorsor(theta);
    const GroupoidPtr& xi = base.left_groupoid();
    const int q_count = base.q_count();
    std::vector<int> alpha(static_cast<size_t>(q_count));
    std::vector<int> rho(static_cast<size_t>(q_count));
    for (int q = 0; q < q_count; ++q) {
        alpha[static_cast<size_t>(q)] = base.alpha(q);
        rho[static_cast<size_t>(q)] = base.rho(q);
    }
    auto dump_table = [&](const ActionGroupoid& gpd, bool left) {
        std::vector<std::vector<int>> table(
            static_cast<size_t>(gpd.arrows()),
            std::vector<int>(static_cast<size_t>(q_count), -1));
        for (int arr = 0; arr < gpd.arrows(); ++arr)
            for (int q = 0; q < q_count; ++q) {
                auto img = left ? base.left_act(arr, q) : base.right_act(q, arr);
                if (img) table[static_cast<size_t>(arr)][static_cast<size_t>(q)] = *img;
            }
        return table;
    };
    auto lact = dump_table(*xi, true);
    auto ract = dump_table(*theta, false);
    for (int arr = 0; arr < theta->arrows(); ++arr) {
        if (theta->arrow_group(arr) == theta->group().identity()) continue;
        int q = theta->target(arr);
        int& slot = ract[static_cast<size_t>(arr)][static_cast<size_t>(q)];
        if (slot >= 0 && slot != q) {
            slot = q;
            break;
        }
    }
    return MoritaBitorsor(xi, theta, q_count, std::move(alpha), std::move(rho),
                          std::move(lact), std::move(ract), base.explicit_q_edges());
}

// ---------------------------------------------------------------------------
// Detail formatting.

std::string fmt(double x) { return format_sig12(x); }
std::string fmt(int n) { return std::to_string(n); }
std::string fmt(bool b) { return b ? "true" : "false"; }

void put(TaskResult& t, const std::string& key, const std::string& value) {
    t.details.emplace_back(key, value);
}

void finish(TaskResult& t, bool ok, const std::string& why) {
    t.passed = ok;
    if (!ok && t.failure.empty()) t.failure = why;
}

// ---------------------------------------------------------------------------
// Tasks.

MoritaInstance build_instance(const Scenario& s, const BuiltScenario& b) {
    if (!b.triple)
        throw ContractError("the morita task needs a dirac block in the scenario");
    if (!s.bitorsor)
        throw ContractError("the morita task needs a bitorsor block in the scenario");
    if (s.bitorsor->kind == "identity") return reflexive_instance(*b.triple);
    if (s.bitorsor->kind == "quotient") return quotient_instance(*b.triple);
    throw ContractError("the morita task needs an identity or quotient bitorsor, not '" +
                        s.bitorsor->kind + "'");
}

TaskResult validate_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "validate";
    bool ok = true;
    std::string why;
    if (b.graph) {
        put(t, "vertices", fmt(b.graph->vertex_count()));
        put(t, "edges", fmt(static_cast<int>(b.graph->edges().size())));
        put(t, "total_length", fmt(b.graph->total_length()));
    }
    if (b.groupoid) {
        const GroupAction& act = b.groupoid->action();
        put(t, "group_order", fmt(act.group().order()));
        put(t, "points", fmt(act.points()));
        put(t, "orbits", fmt(static_cast<int>(act.orbits().size())));
        put(t, "action_free", fmt(act.is_free()));
        put(t, "action_effective", fmt(act.is_effective()));
    }
    if (b.orbifold) {
        SingularLocus locus = singular_locus(*b.orbifold);
        put(t, "singular_vertices", fmt(static_cast<int>(locus.vertices.size())));
        put(t, "pointlike_singularities", fmt(locus.pointlike));
        put(t, "smooth", fmt(locus.empty()));
    }
    if (b.groupoid) {
        // Convolution sanity over seeded random triples: associativity, the
        // unit law, and the anti-multiplicative involution.
        std::mt19937 rng(s.seed);
        std::normal_distribution<double> nd;
        auto random_element = [&]() {
            Vector v(b.groupoid->arrows());
            for (int i = 0; i < b.groupoid->arrows(); ++i)
                v(i) = Complex(nd(rng), nd(rng));
            return AlgebraElement(b.groupoid, std::move(v));
        };
        AlgebraElement one = unit_element(b.groupoid);
        double assoc = 0.0, unit_law = 0.0, star = 0.0;
        for (int k = 0; k < 8; ++k) {
            AlgebraElement f = random_element();
            AlgebraElement g = random_element();
            AlgebraElement h = random_element();
            assoc = std::max(assoc, convolve(convolve(f, g), h)
                                        .max_abs_diff(convolve(f, convolve(g, h))));
            unit_law = std::max(unit_law, convolve(one, f).max_abs_diff(f));
            star = std::max(star, involution(convolve(f, g))
                                      .max_abs_diff(convolve(involution(g), involution(f))));
        }
        put(t, "associativity_residual", fmt(assoc));
        put(t, "unit_residual", fmt(unit_law));
        put(t, "involution_residual", fmt(star));
        if (assoc > s.tolerance || unit_law > s.tolerance || star > s.tolerance) {
            ok = false;
            why = "convolution algebra residual above tolerance";
        }
    }
    if (b.triple) {
        put(t, "section_dim", fmt(b.triple->dim()));
        put(t, "declared_dimension", fmt(b.triple->declared_dimension()));
        put(t, "graded", fmt(b.triple->has_grading()));
    }
    if (b.bitorsor) {
        ValidationReport report = validate_bitorsor(*b.bitorsor);
        for (const ValidationEntry& e : report.entries)
            put(t, "bitorsor." + e.axiom, e.passed ? std::string("pass") : e.witness);
        if (report.passed()) {
            FiberCardinalities fibers = fiber_cardinalities(*b.bitorsor);
            put(t, "rho_fiber_size",
                fmt(fibers.rho_fibers.empty() ? 0 : fibers.rho_fibers.front()));
            put(t, "alpha_fiber_size",
                fmt(fibers.alpha_fibers.empty() ? 0 : fibers.alpha_fibers.front()));
        } else {
            ok = false;
            why = "bitorsor validation failed: " + report.first_failure();
        }
    }
    finish(t, ok, why);
    return t;
}

TaskResult imprimitivity_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "imprimitivity";
    if (!b.bitorsor)
        throw ContractError("the imprimitivity task needs a bitorsor block");
    ImprimitivityReport r = check_imprimitivity(b.bitorsor, 40, s.seed, s.tolerance);
    put(t, "hermitian_theta", fmt(r.hermitian_theta));
    put(t, "hermitian_xi", fmt(r.hermitian_xi));
    put(t, "right_associativity", fmt(r.right_associativity));
    put(t, "left_associativity", fmt(r.left_associativity));
    put(t, "compatibility", fmt(r.compatibility));
    put(t, "action_commutation", fmt(r.action_commutation));
    put(t, "positivity_floor_theta", fmt(r.positivity_floor_theta));
    put(t, "positivity_floor_xi", fmt(r.positivity_floor_xi));
    put(t, "span_dim_theta", fmt(r.span_dim_theta));
    put(t, "span_dim_xi", fmt(r.span_dim_xi));
    t.passed = r.passed;
    t.failure = r.failure;
    return t;
}

TaskResult morita_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "morita";
    MoritaInstance inst = build_instance(s, b);
    MoritaReport r = full_report(inst, 60, s.seed, s.tolerance);
    t.csv_header = {"quantity", "value"};
    auto row = [&](const std::string& key, const std::string& value) {
        put(t, key, value);
        t.csv_rows.push_back({key, value});
    };
    row("m1_compatibility", fmt(r.m1.compatibility));
    row("m1_positivity_floor_theta", fmt(r.m1.positivity_floor_theta));
    row("m1_positivity_floor_xi", fmt(r.m1.positivity_floor_xi));
    row("m1_span_dim_theta", fmt(r.m1.span_dim_theta));
    row("m1_span_dim_xi", fmt(r.m1.span_dim_xi));
    row("m2_unitarity", fmt(r.m2.unitarity));
    row("m2_algebra", fmt(r.m2.algebra));
    row("m2_dirac", fmt(r.m2.dirac));
    row("m2_grading", fmt(r.m2.grading));
    row("m2_induced_dim", fmt(r.m2.induced_dim));
    row("m3_max_defect", fmt(r.m3.max_defect));
    row("m3_constant_defect", fmt(r.m3.constant_defect));
    row("m3_adjoint_gap", fmt(r.m3.adjoint_gap));
    row("m4_right_fitted", fmt(r.m4.right.fitted));
    row("m4_right_declared", fmt(r.m4.right.declared));
    row("m4_right_fallback", fmt(r.m4.right.used_fallback));
    row("m4_left_fitted", fmt(r.m4.left.fitted));
    row("m4_left_declared", fmt(r.m4.left.declared));
    row("m4_left_fallback", fmt(r.m4.left.used_fallback));
    row("m5_scale", fmt(r.m5.scale));
    row("m5_isometry", fmt(r.m5.isometry));
    row("m5_algebra", fmt(r.m5.algebra));
    row("m5_dirac", fmt(r.m5.dirac));
    row("m5_weights_gap", fmt(r.m5.weights_gap));
    row("smooth", fmt(r.smoothness.smooth));
    t.passed = r.passed;
    t.failure = r.failure;
    return t;
}

TaskResult distance_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "distance";
    if (!b.triple)
        throw ContractError("the distance task needs a dirac block in the scenario");
    const int points = b.triple->groupoid()->points();
    std::vector<DistanceQuerySpec> queries = s.distance_queries;
    if (queries.empty()) {
        queries.push_back({0, points / 2, false});
        const GroupAction& act = b.triple->groupoid()->action();
        if (act.group().order() > 1 && act.is_free())
            queries.push_back({0, points / 2, true});
    }
    t.csv_header = {"x", "x_prime", "mode",       "lower",      "upper",
                    "reference",    "feasibility", "iterations"};
    bool ok = true;
    std::string why;
    for (const DistanceQuerySpec& q : queries) {
        if (q.x < 0 || q.x >= points || q.x_prime < 0 || q.x_prime >= points)
            throw ContractError("distance query endpoint out of range");
        DistanceBracket br;
        double reference = 0.0;
        if (q.invariant) {
            if (!b.orbifold)
                throw ContractError(
                    "an invariant distance query needs a graph action");
            const std::vector<int>& oi = b.orbifold->orbit_index();
            br = connes_distance_invariant(*b.triple, oi[static_cast<size_t>(q.x)],
                                           oi[static_cast<size_t>(q.x_prime)]);
            reference = orbifold_distance(*b.orbifold, q.x, q.x_prime);
        } else {
            br = connes_distance(*b.triple, q.x, q.x_prime);
            reference =
                b.triple->dirac().graph()->shortest_paths(q.x)[static_cast<size_t>(
                    q.x_prime)];
        }
        double feasibility = std::abs(br.certificate_seminorm - 1.0);
        bool coincident = br.lower == 0.0 && br.certificate_seminorm == 0.0;
        bool unbounded = std::isinf(br.lower);
        bool query_ok = (coincident || unbounded || feasibility <= 1e-9) &&
                        (unbounded ? std::isinf(br.upper)
                                   : br.lower <= br.upper + 1e-9);
        if (!query_ok) {
            ok = false;
            why = "distance bracket for (" + fmt(q.x) + ", " + fmt(q.x_prime) +
                  ") is not certified";
        }
        t.csv_rows.push_back({fmt(q.x), fmt(q.x_prime),
                              q.invariant ? "invariant" : "full", fmt(br.lower),
                              fmt(br.upper), fmt(reference),
                              fmt(coincident ? 0.0 : feasibility),
                              fmt(br.iterations)});
    }
    put(t, "queries", fmt(static_cast<int>(queries.size())));
    finish(t, ok, why);
    return t;
}

TaskResult theorem3_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "theorem3";
    if (!b.orbifold)
        throw ContractError("the theorem3 task needs a graph and an action");
    require_pointlike(*b.orbifold);
    std::vector<int> sizes = s.family_sizes;
    if (sizes.empty()) sizes = {16, 32, 64, 128, 256};
    Theorem3Report r = theorem3_harness(sizes, s.haar);
    t.csv_header = {"size",     "endpoint", "spectral_lower",
                    "spectral_upper", "geodesic", "rel_error"};
    for (const Theorem3Endpoint* ep : {&r.antipodal, &r.adjacent})
        for (const Theorem3Row& row : ep->rows)
            t.csv_rows.push_back({fmt(row.size), ep->label, fmt(row.spectral_lower),
                                  fmt(row.spectral_upper), fmt(row.geodesic),
                                  fmt(row.rel_error)});
    put(t, "antipodal_trend_violations", fmt(r.antipodal.trend_violations));
    put(t, "antipodal_converged", fmt(r.antipodal.converged));
    put(t, "adjacent_trend_violations", fmt(r.adjacent.trend_violations));
    put(t, "adjacent_converged", fmt(r.adjacent.converged));
    put(t, "companion_residual", fmt(r.companion_residual));
    t.passed = r.passed;
    t.failure = r.failure;
    return t;
}

TaskResult spectrum_task(const Scenario& s, const BuiltScenario& b) {
    TaskResult t;
    t.task = "spectrum";
    if (!b.triple)
        throw ContractError("the spectrum task needs a dirac block in the scenario");
    t.csv_header = {"series", "index", "value"};
    RealVector ambient = spectrum(b.triple->dirac());
    for (int i = 0; i < ambient.size(); ++i)
        t.csv_rows.push_back({"ambient", fmt(static_cast<int>(i)), fmt(ambient(i))});
    InvariantTriple inv = invariant_triple(*b.triple);
    Eigen::SelfAdjointEigenSolver<Matrix> es(inv.dirac);
    RealVector invariant = es.eigenvalues();
    for (int i = 0; i < invariant.size(); ++i)
        t.csv_rows.push_back(
            {"invariant", fmt(static_cast<int>(i)), fmt(invariant(i))});
    put(t, "ambient_dim", fmt(static_cast<int>(ambient.size())));
    put(t, "invariant_dim", fmt(static_cast<int>(invariant.size())));
    SmoothnessVerdict verdict = smoothness_verdict(b.triple->groupoid()->action());
    put(t, "smooth", fmt(verdict.smooth));
    put(t, "singular_vertices", fmt(static_cast<int>(verdict.singular_vertices.size())));
    bool ok = true;
    std::string why;
    // When the canonical quotient triple exists, the invariant spectrum must
    // reproduce it.  Nonfree actions have no such triple; report without a
    // comparison claim.
    try {
        MoritaInstance inst = quotient_instance(*b.triple);
        RealVector quotient = spectrum(inst.left_triple.dirac());
        for (int i = 0; i < quotient.size(); ++i)
            t.csv_rows.push_back(
                {"quotient", fmt(static_cast<int>(i)), fmt(quotient(i))});
        double gap = multiset_distance(sorted(invariant), sorted(quotient));
        put(t, "comparison", "quotient");
        put(t, "spectrum_gap", fmt(gap));
        if (!(gap <= s.tolerance)) {
            ok = false;
            why = "invariant spectrum differs from the quotient spectrum";
        }
    } catch (const ContractError&) {
        put(t, "comparison", "none");
    }
    finish(t, ok, why);
    return t;
}

TaskResult prop5_task(const Scenario& s, const BuiltScenario&) {
    TaskResult t;
    t.task = "prop5";
    std::vector<int> sizes = s.family_sizes;
    if (sizes.empty()) sizes = {16, 32, 64};
    Prop5Report r = verify_prop5(sizes, s.haar, s.seed);
    t.csv_header = {"size", "tent_defect", "random_defect", "ratio_to_previous"};
    for (size_t k = 0; k < sizes.size(); ++k)
        t.csv_rows.push_back({fmt(sizes[k]), fmt(r.tent_defects[k]),
                              fmt(r.random_defects[k]),
                              k == 0 ? std::string() : fmt(r.tent_ratios[k - 1])});
    put(t, "constant_residual", fmt(r.constant_residual));
    put(t, "ratios_in_band", fmt(r.ratios_in_band));
    bool ok = r.ratios_in_band && r.constant_residual <= 1e-12;
    finish(t, ok, "first-order defect did not contract at first order");
    return t;
}

TaskResult run_task_built(const Scenario& s, const BuiltScenario& b,
                          const std::string& task) {
    if (task == "validate") return validate_task(s, b);
    if (task == "imprimitivity") return imprimitivity_task(s, b);
    if (task == "morita") return morita_task(s, b);
    if (task == "distance") return distance_task(s, b);
    if (task == "theorem3") return theorem3_task(s, b);
    if (task == "spectrum") return spectrum_task(s, b);
    if (task == "prop5") return prop5_task(s, b);
    throw StructuralError("unknown task '" + task + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario parse_scenario(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw StructuralError(std::string("scenario JSON: ") + e.what());
    }
    if (!j.is_object()) throw StructuralError("scenario: the document must be an object");
    check_keys(j,
               {"name", "description", "convention", "seed", "tolerance",
                "declared_dimension", "graph", "action", "bundle", "dirac", "bitorsor",
                "distance_queries", "family_sizes", "tasks"},
               "scenario");
    Scenario s;
    s.name = get_string(j, "name", "scenario");
    s.description = opt_string(j, "description", "scenario", "");
    std::string convention = opt_string(j, "convention", "scenario", "counting");
    if (convention == "counting")
        s.haar = HaarConvention::Counting;
    else if (convention == "normalized")
        s.haar = HaarConvention::Normalized;
    else
        throw StructuralError("scenario: unknown convention '" + convention + "'");
    int seed = opt_int(j, "seed", "scenario", 1);
    if (seed < 0) throw StructuralError("scenario: field 'seed' must be nonnegative");
    s.seed = static_cast<unsigned>(seed);
    s.tolerance = opt_double(j, "tolerance", "scenario", 1e-10);
    if (!(s.tolerance > 0.0))
        throw StructuralError("scenario: field 'tolerance' must be positive");
    s.declared_dimension = opt_int(j, "declared_dimension", "scenario", 1);
    if (auto it = j.find("graph"); it != j.end()) s.graph = parse_graph(*it);
    if (auto it = j.find("action"); it != j.end()) s.action = parse_action(*it);
    if (auto it = j.find("bundle"); it != j.end()) s.bundle = parse_bundle(*it);
    if (auto it = j.find("dirac"); it != j.end()) s.dirac = parse_dirac(*it);
    if (auto it = j.find("bitorsor"); it != j.end()) s.bitorsor = parse_bitorsor(*it);
    if (auto it = j.find("distance_queries"); it != j.end()) {
        if (!it->is_array())
            throw StructuralError("scenario: field 'distance_queries' must be an array");
        for (const Json& q : *it) {
            check_keys(q, {"x", "x_prime", "invariant"}, "scenario distance query");
            DistanceQuerySpec spec;
            spec.x = get_int(require_field(q, "x", "scenario distance query"), "x",
                             "scenario distance query");
            spec.x_prime =
                get_int(require_field(q, "x_prime", "scenario distance query"),
                        "x_prime", "scenario distance query");
            spec.invariant = opt_bool(q, "invariant", "scenario distance query", false);
            s.distance_queries.push_back(spec);
        }
    }
    if (auto it = j.find("family_sizes"); it != j.end()) {
        if (!it->is_array())
            throw StructuralError("scenario: field 'family_sizes' must be an array");
        for (const Json& v : *it)
            s.family_sizes.push_back(get_int(v, "family_sizes", "scenario"));
    }
    if (auto it = j.find("tasks"); it != j.end()) {
        if (!it->is_array())
            throw StructuralError("scenario: field 'tasks' must be an array");
        for (const Json& v : *it) {
            if (!v.is_string())
                throw StructuralError("scenario: each task must be a string");
            s.tasks.push_back(v.get<std::string>());
        }
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& s) {
    Json j;
    j["name"] = s.name;
    if (!s.description.empty()) j["description"] = s.description;
    j["convention"] = to_string(s.haar);
    j["seed"] = s.seed;
    j["tolerance"] = s.tolerance;
    j["declared_dimension"] = s.declared_dimension;
    if (s.graph) j["graph"] = graph_json(*s.graph);
    if (s.action) j["action"] = action_json(*s.action);
    if (s.bundle) {
        Json b;
        b["kind"] = s.bundle->kind;
        if (s.bundle->kind == "trivial") b["rank"] = s.bundle->rank;
        j["bundle"] = b;
    }
    if (s.dirac) {
        Json d;
        d["kind"] = s.dirac->kind;
        d["rank"] = s.dirac->rank;
        if (s.dirac->drop_grading) d["drop_grading"] = true;
        j["dirac"] = d;
    }
    if (s.bitorsor) j["bitorsor"] = Json{{"kind", s.bitorsor->kind}};
    if (!s.distance_queries.empty()) {
        Json queries = Json::array();
        for (const DistanceQuerySpec& q : s.distance_queries) {
            Json item;
            item["x"] = q.x;
            item["x_prime"] = q.x_prime;
            if (q.invariant) item["invariant"] = true;
            queries.push_back(item);
        }
        j["distance_queries"] = queries;
    }
    if (!s.family_sizes.empty()) j["family_sizes"] = s.family_sizes;
    if (!s.tasks.empty()) j["tasks"] = s.tasks;
    return j.dump(2) + "\n";
}

BuiltScenario build_scenario(const Scenario& s) {
    BuiltScenario out;
    if (s.graph) out.graph = std::make_shared<const MetricGraph>(build_graph(*s.graph));
    if (s.action) {
        GroupAction act = build_action(*s.action, out.graph.get());
        if (out.graph) {
            if (act.points() != out.graph->vertex_count())
                throw StructuralError(
                    "scenario action moves a different point set than the graph");
            out.orbifold.emplace(*out.graph, act);
        }
        out.groupoid = make_groupoid(std::move(act), s.haar);
    }
    if (s.bundle) {
        if (!out.groupoid)
            throw StructuralError("scenario bundle needs an action block");
        out.bundle =
            std::make_shared<const SpinorBundle>(build_bundle(*s.bundle, out.groupoid));
    }
    if (s.dirac) {
        if (s.dirac->kind != "circle")
            throw StructuralError("scenario dirac: unknown kind '" + s.dirac->kind + "'");
        if (!out.graph)
            throw StructuralError("scenario dirac needs a graph block");
        if (!out.groupoid)
            throw StructuralError("scenario dirac needs an action block");
        if (!out.bundle)
            out.bundle = std::make_shared<const SpinorBundle>(
                SpinorBundle::trivial(out.groupoid, s.dirac->rank));
        if (out.bundle->rank() != s.dirac->rank)
            throw StructuralError("scenario dirac rank differs from the bundle rank");
        DiracOperator d = circle_dirac(out.graph, s.dirac->rank);
        if (s.dirac->drop_grading) d = drop_grading(d);
        out.triple.emplace(out.groupoid, out.bundle, std::move(d),
                           s.declared_dimension);
    }
    if (s.bitorsor) {
        if (!out.groupoid)
            throw StructuralError("scenario bitorsor needs an action block");
        if (s.bitorsor->kind == "identity")
            out.bitorsor =
                std::make_shared<const MoritaBitorsor>(identity_bitorsor(out.groupoid));
        else if (s.bitorsor->kind == "quotient")
            out.bitorsor =
                std::make_shared<const MoritaBitorsor>(quotient_bitorsor(out.groupoid));
        else if (s.bitorsor->kind == "corrupted_quotient")
            out.bitorsor =
                std::make_shared<const MoritaBitorsor>(corrupted_quotient(out.groupoid));
        else
            throw StructuralError("scenario bitorsor: unknown kind '" +
                                  s.bitorsor->kind + "'");
    }
    return out;
}

TaskResult run_task(const Scenario& s, const std::string& task) {
    BuiltScenario built = build_scenario(s);
    return run_task_built(s, built, task);
}

RunResult run_scenario(const Scenario& s) {
    BuiltScenario built = build_scenario(s);
    std::vector<std::string> tasks = s.tasks;
    if (tasks.empty()) tasks.push_back("validate");
    RunResult result;
    result.passed = true;
    for (const std::string& task : tasks) {
        result.tasks.push_back(run_task_built(s, built, task));
        result.passed = result.passed && result.tasks.back().passed;
    }
    return result;
}

void write_report(std::ostream& out, const Scenario& s, const RunResult& r) {
    Json j;
    j["schema"] = "ncorb-report/1";
    j["scenario"] = s.name;
    j["convention"] = to_string(s.haar);
    j["seed"] = s.seed;
    j["tolerance"] = s.tolerance;
    Json tasks = Json::array();
    for (const TaskResult& t : r.tasks) {
        Json item;
        item["task"] = t.task;
        item["passed"] = t.passed;
        if (!t.failure.empty()) item["failure"] = t.failure;
        Json details = Json::object();
        for (const auto& [key, value] : t.details) details[key] = value;
        item["details"] = details;
        tasks.push_back(item);
    }
    j["tasks"] = tasks;
    j["passed"] = r.passed;
    out << j.dump(2) << "\n";
}

void write_task_csv(std::ostream& out, const TaskResult& t) {
    auto write_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    };
    write_row(t.csv_header);
    for (const auto& row : t.csv_rows) write_row(row);
}

}  // namespace ncorb
