#include "ncorb/bitorsor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace ncorb {
namespace {

std::string arrow_desc(const ActionGroupoid& gpd, int a) {
    std::ostringstream os;
    os << "(g=" << gpd.arrow_group(a) << ",x=" << gpd.arrow_point(a) << ")";
    return os.str();
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] =
                parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
};

// The balanced pairs behind a composition: valid (p-point, q-point) pairs,
// their class labels under the middle action, and one representative per
// class.  Shared by compose_bitorsors and the composed lift so the class
// indexing agrees.
struct ComposedData {
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> pair_class;  // parallel to pairs
    std::vector<std::pair<int, int>> reps;
    int class_count = 0;
};

ComposedData build_composed_data(const MoritaBitorsor& p, const MoritaBitorsor& q) {
    const ActionGroupoid& middle = *p.right_groupoid();
    ComposedData data;
    std::map<std::pair<int, int>, int> pair_id;
    for (int i = 0; i < p.q_count(); ++i)
        for (int j = 0; j < q.q_count(); ++j)
            if (p.rho(i) == q.alpha(j)) {
                pair_id[{i, j}] = static_cast<int>(data.pairs.size());
                data.pairs.emplace_back(i, j);
            }
    UnionFind uf(static_cast<int>(data.pairs.size()));
    for (size_t k = 0; k < data.pairs.size(); ++k) {
        auto [i, j] = data.pairs[k];
        for (int tau : middle.target_fiber(p.rho(i))) {
            int i2 = *p.right_act(i, tau);
            int j2 = *q.left_act(middle.inverse(tau), j);
            uf.unite(static_cast<int>(k), pair_id.at({i2, j2}));
        }
    }
    std::map<int, int> root_to_class;
    data.pair_class.resize(data.pairs.size());
    for (size_t k = 0; k < data.pairs.size(); ++k) {
        int root = uf.find(static_cast<int>(k));
        auto it = root_to_class.find(root);
        if (it == root_to_class.end()) {
            it = root_to_class.emplace(root, data.class_count++).first;
            data.reps.push_back(data.pairs[k]);
        }
        data.pair_class[k] = it->second;
    }
    return data;
}

}  // namespace

MoritaBitorsor::MoritaBitorsor(GroupoidPtr left, GroupoidPtr right, int q_count,
                               std::vector<int> alpha, std::vector<int> rho,
                               std::vector<std::vector<int>> left_action,
                               std::vector<std::vector<int>> right_action,
                               std::vector<Edge> explicit_q_edges)
    : left_(std::move(left)),
      right_(std::move(right)),
      q_count_(q_count),
      alpha_(std::move(alpha)),
      rho_(std::move(rho)),
      lact_(std::move(left_action)),
      ract_(std::move(right_action)),
      explicit_q_edges_(std::move(explicit_q_edges)) {
    if (!left_ || !right_) throw StructuralError("bitorsor needs both groupoids");
    if (q_count_ <= 0) throw StructuralError("bitorsor space must be nonempty");
    if (static_cast<int>(alpha_.size()) != q_count_ ||
        static_cast<int>(rho_.size()) != q_count_)
        throw StructuralError("anchor tables must cover the whole space");
    for (int q = 0; q < q_count_; ++q) {
        if (alpha_[static_cast<size_t>(q)] < 0 ||
            alpha_[static_cast<size_t>(q)] >= left_->points())
            throw StructuralError("alpha anchor out of range");
        if (rho_[static_cast<size_t>(q)] < 0 ||
            rho_[static_cast<size_t>(q)] >= right_->points())
            throw StructuralError("rho anchor out of range");
    }
    auto check_table = [&](const std::vector<std::vector<int>>& t, int n_arrows,
                           const char* name) {
        if (static_cast<int>(t.size()) != n_arrows)
            throw StructuralError(std::string(name) + " table must have one row per arrow");
        for (const auto& row : t) {
            if (static_cast<int>(row.size()) != q_count_)
                throw StructuralError(std::string(name) + " table row has wrong width");
            for (int v : row)
                if (v < -1 || v >= q_count_)
                    throw StructuralError(std::string(name) + " table entry out of range");
        }
    };
    check_table(lact_, left_->arrows(), "left action");
    check_table(ract_, right_->arrows(), "right action");
}

int MoritaBitorsor::alpha(int q) const {
    if (q < 0 || q >= q_count_) throw ContractError("torsor point out of range");
    return alpha_[static_cast<size_t>(q)];
}

int MoritaBitorsor::rho(int q) const {
    if (q < 0 || q >= q_count_) throw ContractError("torsor point out of range");
    return rho_[static_cast<size_t>(q)];
}

std::optional<int> MoritaBitorsor::left_act(int tau, int q) const {
    if (tau < 0 || tau >= left_->arrows()) throw ContractError("left arrow out of range");
    if (q < 0 || q >= q_count_) throw ContractError("torsor point out of range");
    int r = lact_[static_cast<size_t>(tau)][static_cast<size_t>(q)];
    if (r < 0) return std::nullopt;
    return r;
}

std::optional<int> MoritaBitorsor::right_act(int q, int sigma) const {
    if (sigma < 0 || sigma >= right_->arrows())
        throw ContractError("right arrow out of range");
    if (q < 0 || q >= q_count_) throw ContractError("torsor point out of range");
    int r = ract_[static_cast<size_t>(sigma)][static_cast<size_t>(q)];
    if (r < 0) return std::nullopt;
    return r;
}

std::vector<int> MoritaBitorsor::alpha_fiber(int y) const {
    std::vector<int> out;
    for (int q = 0; q < q_count_; ++q)
        if (alpha_[static_cast<size_t>(q)] == y) out.push_back(q);
    return out;
}

std::vector<int> MoritaBitorsor::rho_fiber(int x) const {
    std::vector<int> out;
    for (int q = 0; q < q_count_; ++q)
        if (rho_[static_cast<size_t>(q)] == x) out.push_back(q);
    return out;
}

int MoritaBitorsor::q_star(int y) const {
    for (int q = 0; q < q_count_; ++q)
        if (alpha_[static_cast<size_t>(q)] == y) return q;
    throw ContractError("alpha fiber is empty");
}

int MoritaBitorsor::sigma_between(int q, int q_target) const {
    if (alpha(q) != alpha(q_target))
        throw ContractError("points lie in different alpha fibers");
    for (int sigma : right_->target_fiber(rho(q))) {
        auto moved = right_act(q, sigma);
        if (moved && *moved == q_target) return sigma;
    }
    throw ContractError("no right arrow connects the given points");
}

bool ValidationReport::passed() const {
    for (const auto& e : entries)
        if (!e.passed) return false;
    return true;
}

std::string ValidationReport::first_failure() const {
    for (const auto& e : entries)
        if (!e.passed) return e.axiom + ": " + e.witness;
    return {};
}

ValidationReport validate_bitorsor(const MoritaBitorsor& b) {
    const ActionGroupoid& xi = *b.left_groupoid();
    const ActionGroupoid& theta = *b.right_groupoid();
    ValidationReport report;
    auto add = [&](const std::string& axiom, bool ok, const std::string& witness) {
        report.entries.push_back({axiom, ok, ok ? std::string() : witness});
    };

    add("convention-match", xi.haar() == theta.haar(),
        "the two groupoids use different Haar conventions");

    // Definedness domains and anchor laws of the left action.
    {
        bool ok = true;
        std::string witness;
        for (int tau = 0; tau < xi.arrows() && ok; ++tau)
            for (int q = 0; q < b.q_count() && ok; ++q) {
                auto moved = b.left_act(tau, q);
                bool should = xi.source(tau) == b.alpha(q);
                if (moved.has_value() != should) {
                    ok = false;
                    std::ostringstream os;
                    os << "tau=" << arrow_desc(xi, tau) << " q=" << q
                       << (should ? " should be defined" : " should be undefined");
                    witness = os.str();
                } else if (moved) {
                    if (b.alpha(*moved) != xi.target(tau) || b.rho(*moved) != b.rho(q)) {
                        ok = false;
                        std::ostringstream os;
                        os << "anchors of tau.q wrong at tau=" << arrow_desc(xi, tau)
                           << " q=" << q;
                        witness = os.str();
                    }
                }
            }
        add("left-action-domain-and-anchors", ok, witness);
    }

    // Definedness domains and anchor laws of the right action.
    {
        bool ok = true;
        std::string witness;
        for (int sigma = 0; sigma < theta.arrows() && ok; ++sigma)
            for (int q = 0; q < b.q_count() && ok; ++q) {
                auto moved = b.right_act(q, sigma);
                bool should = theta.target(sigma) == b.rho(q);
                if (moved.has_value() != should) {
                    ok = false;
                    std::ostringstream os;
                    os << "sigma=" << arrow_desc(theta, sigma) << " q=" << q
                       << (should ? " should be defined" : " should be undefined");
                    witness = os.str();
                } else if (moved) {
                    if (b.rho(*moved) != theta.source(sigma) ||
                        b.alpha(*moved) != b.alpha(q)) {
                        ok = false;
                        std::ostringstream os;
                        os << "anchors of q.sigma wrong at sigma=" << arrow_desc(theta, sigma)
                           << " q=" << q;
                        witness = os.str();
                    }
                }
            }
        add("right-action-domain-and-anchors", ok, witness);
    }

    // Unit laws.
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q) {
            auto lu = b.left_act(xi.unit_arrow(b.alpha(q)), q);
            auto ru = b.right_act(q, theta.unit_arrow(b.rho(q)));
            if (!lu || *lu != q || !ru || *ru != q) {
                ok = false;
                std::ostringstream os;
                os << "unit arrow moves q=" << q;
                witness = os.str();
            }
        }
        add("unit-laws", ok, witness);
    }

    // Undefined intermediate values (possible on corrupted tables) are folded
    // into the checks below as ordinary failures rather than crashes.
    auto lval = [&](int tau, int q) {
        if (q < 0) return -2;
        auto moved = b.left_act(tau, q);
        return moved ? *moved : -2;
    };
    auto rval = [&](int q, int sigma) {
        if (q < 0) return -2;
        auto moved = b.right_act(q, sigma);
        return moved ? *moved : -2;
    };

    // Left compatibility: (tau2 o tau1) . q = tau2 . (tau1 . q).
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q)
            for (int tau1 : xi.source_fiber(b.alpha(q))) {
                int mid = lval(tau1, q);
                for (int tau2 : xi.source_fiber(xi.target(tau1))) {
                    int composite = compose_arrows(xi, tau2, tau1);
                    int via_composite = lval(composite, q);
                    int stepwise = lval(tau2, mid);
                    if (via_composite < 0 || via_composite != stepwise) {
                        ok = false;
                        std::ostringstream os;
                        os << "left compatibility fails at q=" << q
                           << " tau1=" << arrow_desc(xi, tau1)
                           << " tau2=" << arrow_desc(xi, tau2);
                        witness = os.str();
                        break;
                    }
                }
                if (!ok) break;
            }
        add("left-compatibility", ok, witness);
    }

    // Right compatibility: q . (sigma1 o sigma2) = (q . sigma1) . sigma2.
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q)
            for (int sigma1 : theta.target_fiber(b.rho(q))) {
                int mid = rval(q, sigma1);
                for (int sigma2 : theta.target_fiber(theta.source(sigma1))) {
                    int composite = compose_arrows(theta, sigma1, sigma2);
                    int via_composite = rval(q, composite);
                    int stepwise = rval(mid, sigma2);
                    if (via_composite < 0 || via_composite != stepwise) {
                        ok = false;
                        std::ostringstream os;
                        os << "right compatibility fails at q=" << q
                           << " sigma1=" << arrow_desc(theta, sigma1)
                           << " sigma2=" << arrow_desc(theta, sigma2);
                        witness = os.str();
                        break;
                    }
                }
                if (!ok) break;
            }
        add("right-compatibility", ok, witness);
    }

    // Commutation of the two actions.
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q)
            for (int tau : xi.source_fiber(b.alpha(q))) {
                for (int sigma : theta.target_fiber(b.rho(q))) {
                    int left_first = rval(lval(tau, q), sigma);
                    int right_first = lval(tau, rval(q, sigma));
                    if (left_first < 0 || left_first != right_first) {
                        ok = false;
                        std::ostringstream os;
                        os << "actions do not commute at q=" << q
                           << " tau=" << arrow_desc(xi, tau)
                           << " sigma=" << arrow_desc(theta, sigma);
                        witness = os.str();
                        break;
                    }
                }
                if (!ok) break;
            }
        add("action-commutation", ok, witness);
    }

    // Right action free and transitive on alpha fibers.
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q) {
            std::set<int> images;
            for (int sigma : theta.target_fiber(b.rho(q))) images.insert(rval(q, sigma));
            auto fiber = b.alpha_fiber(b.alpha(q));
            if (images.size() != static_cast<size_t>(theta.group().order()) ||
                images != std::set<int>(fiber.begin(), fiber.end())) {
                ok = false;
                std::ostringstream os;
                os << "right action is not simply transitive on the alpha fiber at q=" << q;
                witness = os.str();
            }
        }
        add("right-torsor", ok, witness);
    }

    // Left action free and transitive on rho fibers.
    {
        bool ok = true;
        std::string witness;
        for (int q = 0; q < b.q_count() && ok; ++q) {
            std::set<int> images;
            for (int tau : xi.source_fiber(b.alpha(q))) images.insert(lval(tau, q));
            auto fiber = b.rho_fiber(b.rho(q));
            if (images.size() != static_cast<size_t>(xi.group().order()) ||
                images != std::set<int>(fiber.begin(), fiber.end())) {
                ok = false;
                std::ostringstream os;
                os << "left action is not simply transitive on the rho fiber at q=" << q;
                witness = os.str();
            }
        }
        add("left-torsor", ok, witness);
    }

    // Anchor surjectivity.
    {
        bool ok = true;
        std::string witness;
        for (int x = 0; x < theta.points() && ok; ++x)
            if (b.rho_fiber(x).empty()) {
                ok = false;
                witness = "rho misses x=" + std::to_string(x);
            }
        for (int y = 0; y < xi.points() && ok; ++y)
            if (b.alpha_fiber(y).empty()) {
                ok = false;
                witness = "alpha misses y=" + std::to_string(y);
            }
        add("anchor-surjectivity", ok, witness);
    }

    return report;
}

void ensure_valid(const MoritaBitorsor& b) {
    auto report = validate_bitorsor(b);
    if (!report.passed())
        throw ContractError("bitorsor validation failed, " + report.first_failure());
}

FiberCardinalities fiber_cardinalities(const MoritaBitorsor& b) {
    FiberCardinalities out;
    const int k_order = b.left_groupoid()->group().order();
    const int g_order = b.right_groupoid()->group().order();
    for (int x = 0; x < b.right_groupoid()->points(); ++x) {
        int size = static_cast<int>(b.rho_fiber(x).size());
        if (size != k_order)
            throw ContractError("rho fiber over x=" + std::to_string(x) + " has size " +
                                std::to_string(size) + ", expected " +
                                std::to_string(k_order));
        out.rho_fibers.push_back(size);
    }
    for (int y = 0; y < b.left_groupoid()->points(); ++y) {
        int size = static_cast<int>(b.alpha_fiber(y).size());
        if (size != g_order)
            throw ContractError("alpha fiber over y=" + std::to_string(y) + " has size " +
                                std::to_string(size) + ", expected " +
                                std::to_string(g_order));
        out.alpha_fibers.push_back(size);
    }
    return out;
}

MoritaBitorsor identity_bitorsor(const GroupoidPtr& theta) {
    if (!theta) throw StructuralError("identity bitorsor needs a groupoid");
    const int n = theta->arrows();
    std::vector<int> alpha(static_cast<size_t>(n));
    std::vector<int> rho(static_cast<size_t>(n));
    for (int a = 0; a < n; ++a) {
        alpha[static_cast<size_t>(a)] = theta->target(a);
        rho[static_cast<size_t>(a)] = theta->source(a);
    }
    std::vector<std::vector<int>> lact(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    std::vector<std::vector<int>> ract(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int tau = 0; tau < n; ++tau)
        for (int q = 0; q < n; ++q) {
            if (auto c = theta->compose(tau, q))
                lact[static_cast<size_t>(tau)][static_cast<size_t>(q)] = *c;
            if (auto c = theta->compose(q, tau))
                ract[static_cast<size_t>(tau)][static_cast<size_t>(q)] = *c;
        }
    MoritaBitorsor b(theta, theta, n, std::move(alpha), std::move(rho), std::move(lact),
                     std::move(ract));
    b.kind_ = BitorsorKind::Identity;
    return b;
}

MoritaBitorsor quotient_bitorsor(const GroupoidPtr& theta) {
    if (!theta) throw StructuralError("quotient bitorsor needs a groupoid");
    const GroupAction& action = theta->action();
    std::vector<int> fixed;
    for (int x = 0; x < action.points(); ++x)
        if (action.stabilizer(x).size() > 1) fixed.push_back(x);
    if (!fixed.empty()) {
        std::ostringstream os;
        os << "quotient bitorsor requires a free action; fixed vertices:";
        for (int x : fixed) os << " " << x;
        throw ContractError(os.str());
    }
    auto orbit_index = action.orbit_index();
    const int n_orbits = static_cast<int>(action.orbit_representatives().size());
    GroupoidPtr xi =
        make_groupoid(GroupAction::trivial_on(n_orbits, 1), theta->haar());

    const int n = action.points();
    std::vector<int> alpha(static_cast<size_t>(n));
    std::vector<int> rho(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        alpha[static_cast<size_t>(q)] = orbit_index[static_cast<size_t>(q)];
        rho[static_cast<size_t>(q)] = q;
    }
    std::vector<std::vector<int>> lact(static_cast<size_t>(xi->arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int q = 0; q < n; ++q) {
        int unit = xi->unit_arrow(alpha[static_cast<size_t>(q)]);
        lact[static_cast<size_t>(unit)][static_cast<size_t>(q)] = q;
    }
    std::vector<std::vector<int>> ract(static_cast<size_t>(theta->arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int sigma = 0; sigma < theta->arrows(); ++sigma)
        ract[static_cast<size_t>(sigma)][static_cast<size_t>(theta->target(sigma))] =
            theta->source(sigma);
    MoritaBitorsor b(xi, theta, n, std::move(alpha), std::move(rho), std::move(lact),
                     std::move(ract));
    b.kind_ = BitorsorKind::Quotient;
    return b;
}

MoritaBitorsor dual_bitorsor(BitorsorPtr src) {
    if (!src) throw StructuralError("dual bitorsor needs a bitorsor");
    const ActionGroupoid& xi = *src->left_groupoid();
    const ActionGroupoid& theta = *src->right_groupoid();
    const int n = src->q_count();
    std::vector<int> alpha(static_cast<size_t>(n));
    std::vector<int> rho(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        alpha[static_cast<size_t>(q)] = src->rho(q);
        rho[static_cast<size_t>(q)] = src->alpha(q);
    }
    // sigma . q := q . sigma^{-1} and q . tau := tau^{-1} . q.
    std::vector<std::vector<int>> lact(static_cast<size_t>(theta.arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int sigma = 0; sigma < theta.arrows(); ++sigma)
        for (int q = 0; q < n; ++q)
            if (auto moved = src->right_act(q, theta.inverse(sigma)))
                lact[static_cast<size_t>(sigma)][static_cast<size_t>(q)] = *moved;
    std::vector<std::vector<int>> ract(static_cast<size_t>(xi.arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int tau = 0; tau < xi.arrows(); ++tau)
        for (int q = 0; q < n; ++q)
            if (auto moved = src->left_act(xi.inverse(tau), q))
                ract[static_cast<size_t>(tau)][static_cast<size_t>(q)] = *moved;
    MoritaBitorsor b(src->right_groupoid(), src->left_groupoid(), n, std::move(alpha),
                     std::move(rho), std::move(lact), std::move(ract));
    b.kind_ = BitorsorKind::Dual;
    b.parent_left_ = std::move(src);
    return b;
}

MoritaBitorsor compose_bitorsors(BitorsorPtr p, BitorsorPtr q) {
    if (!p || !q) throw StructuralError("composition needs two bitorsors");
    if (p->right_groupoid().get() != q->left_groupoid().get())
        throw StructuralError(
            "composition requires the right groupoid of the first factor to be the left "
            "groupoid of the second");
    const ActionGroupoid& lambda = *p->left_groupoid();
    const ActionGroupoid& theta = *q->right_groupoid();
    ComposedData data = build_composed_data(*p, *q);
    const int n = data.class_count;
    if (n == 0) throw StructuralError("composition produced an empty space");

    std::map<std::pair<int, int>, int> class_of;
    for (size_t k = 0; k < data.pairs.size(); ++k)
        class_of[data.pairs[k]] = data.pair_class[k];

    std::vector<int> alpha(static_cast<size_t>(n));
    std::vector<int> rho(static_cast<size_t>(n));
    for (int c = 0; c < n; ++c) {
        auto [i, j] = data.reps[static_cast<size_t>(c)];
        alpha[static_cast<size_t>(c)] = p->alpha(i);
        rho[static_cast<size_t>(c)] = q->rho(j);
    }
    std::vector<std::vector<int>> lact(static_cast<size_t>(lambda.arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int c = 0; c < n; ++c) {
        auto [i, j] = data.reps[static_cast<size_t>(c)];
        for (int tau : lambda.source_fiber(p->alpha(i)))
            lact[static_cast<size_t>(tau)][static_cast<size_t>(c)] =
                class_of.at({*p->left_act(tau, i), j});
    }
    std::vector<std::vector<int>> ract(static_cast<size_t>(theta.arrows()),
                                       std::vector<int>(static_cast<size_t>(n), -1));
    for (int c = 0; c < n; ++c) {
        auto [i, j] = data.reps[static_cast<size_t>(c)];
        for (int sigma : theta.target_fiber(q->rho(j)))
            ract[static_cast<size_t>(sigma)][static_cast<size_t>(c)] =
                class_of.at({i, *q->right_act(j, sigma)});
    }
    MoritaBitorsor b(p->left_groupoid(), q->right_groupoid(), n, std::move(alpha),
                     std::move(rho), std::move(lact), std::move(ract));
    b.kind_ = BitorsorKind::Composed;
    b.parent_left_ = std::move(p);
    b.parent_right_ = std::move(q);
    b.class_reps_ = std::move(data.reps);
    return b;
}

namespace {

// Extends the partial map by the orbit of q0 under both actions; returns
// false on any clash with anchors, actions, or injectivity.
bool propagate_iso(const MoritaBitorsor& a, const MoritaBitorsor& b, int q0, int image0,
                   std::vector<int>& f, std::vector<bool>& used) {
    const ActionGroupoid& xi = *a.left_groupoid();
    const ActionGroupoid& theta = *a.right_groupoid();
    std::vector<int> queue = {q0};
    f[static_cast<size_t>(q0)] = image0;
    used[static_cast<size_t>(image0)] = true;
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        int v = f[static_cast<size_t>(u)];
        if (b.alpha(v) != a.alpha(u) || b.rho(v) != a.rho(u)) return false;
        auto push = [&](int u2, int v2) {
            int& slot = f[static_cast<size_t>(u2)];
            if (slot >= 0) return slot == v2;
            if (used[static_cast<size_t>(v2)]) return false;
            slot = v2;
            used[static_cast<size_t>(v2)] = true;
            queue.push_back(u2);
            return true;
        };
        for (int tau : xi.source_fiber(a.alpha(u)))
            if (!push(*a.left_act(tau, u), *b.left_act(tau, v))) return false;
        for (int sigma : theta.target_fiber(a.rho(u)))
            if (!push(*a.right_act(u, sigma), *b.right_act(v, sigma))) return false;
    }
    return true;
}

bool search_iso(const MoritaBitorsor& a, const MoritaBitorsor& b, std::vector<int>& f,
                std::vector<bool>& used) {
    int q0 = -1;
    for (int q = 0; q < a.q_count(); ++q)
        if (f[static_cast<size_t>(q)] < 0) {
            q0 = q;
            break;
        }
    if (q0 < 0) return true;
    for (int cand = 0; cand < b.q_count(); ++cand) {
        if (used[static_cast<size_t>(cand)]) continue;
        if (b.alpha(cand) != a.alpha(q0) || b.rho(cand) != a.rho(q0)) continue;
        auto f_saved = f;
        auto used_saved = used;
        if (propagate_iso(a, b, q0, cand, f, used) && search_iso(a, b, f, used))
            return true;
        f = f_saved;
        used = used_saved;
    }
    return false;
}

}  // namespace

std::optional<std::vector<int>> bitorsor_isomorphism(const MoritaBitorsor& a,
                                                     const MoritaBitorsor& b) {
    if (a.left_groupoid().get() != b.left_groupoid().get() ||
        a.right_groupoid().get() != b.right_groupoid().get())
        throw StructuralError("isomorphism search requires the same groupoids on both sides");
    if (a.q_count() != b.q_count()) return std::nullopt;
    std::vector<int> f(static_cast<size_t>(a.q_count()), -1);
    std::vector<bool> used(static_cast<size_t>(b.q_count()), false);
    if (!search_iso(a, b, f, used)) return std::nullopt;
    return f;
}

namespace {

std::vector<Edge> derive_lift_edges(const MoritaBitorsor& b, const MetricGraph& x_graph,
                                    const MetricGraph& y_graph,
                                    const MetricGraph* middle_graph) {
    switch (b.kind()) {
        case BitorsorKind::Identity: {
            // One sheet per group element: arrows (g, x) ~ (g, x') over x ~ x'.
            const ActionGroupoid& theta = *b.right_groupoid();
            std::vector<Edge> edges;
            for (int g = 0; g < theta.group().order(); ++g)
                for (const auto& e : x_graph.edges())
                    edges.push_back(
                        {theta.arrow_id(g, e.u), theta.arrow_id(g, e.v), e.length});
            return edges;
        }
        case BitorsorKind::Quotient:
            return x_graph.edges();
        case BitorsorKind::Dual: {
            auto parent_lift =
                lift_graph(*b.parent_left(), y_graph, x_graph, middle_graph);
            return parent_lift.edges();
        }
        case BitorsorKind::Composed: {
            if (!middle_graph)
                throw StructuralError("composed lift requires the middle graph");
            const auto& p = *b.parent_left();
            const auto& q = *b.parent_right();
            auto p_lift = lift_graph(p, *middle_graph, y_graph);
            auto q_lift = lift_graph(q, x_graph, *middle_graph);
            ComposedData data = build_composed_data(p, q);
            // Classes c, c' are adjacent when some pair of representatives is
            // adjacent on both factors with matching lengths.
            std::map<std::pair<int, int>, double> found;
            for (size_t k = 0; k < data.pairs.size(); ++k)
                for (size_t m = 0; m < data.pairs.size(); ++m) {
                    int c1 = data.pair_class[k];
                    int c2 = data.pair_class[m];
                    if (c1 >= c2) continue;
                    auto [i1, j1] = data.pairs[k];
                    auto [i2, j2] = data.pairs[m];
                    if (!p_lift.adjacent(i1, i2) || !q_lift.adjacent(j1, j2)) continue;
                    double lp = p_lift.edge_length(i1, i2);
                    double lq = q_lift.edge_length(j1, j2);
                    if (std::abs(lp - lq) > 1e-12)
                        throw StructuralError(
                            "composed lift has inconsistent factor lengths");
                    auto key = std::make_pair(c1, c2);
                    auto it = found.find(key);
                    if (it == found.end())
                        found.emplace(key, lq);
                    else if (std::abs(it->second - lq) > 1e-12)
                        throw StructuralError(
                            "composed lift edge seen with two different lengths");
                }
            std::vector<Edge> edges;
            for (const auto& [key, len] : found) edges.push_back({key.first, key.second, len});
            return edges;
        }
        case BitorsorKind::Generic:
            if (b.explicit_q_edges().empty())
                throw StructuralError(
                    "generic bitorsor carries no explicit graph to lift");
            return b.explicit_q_edges();
    }
    throw StructuralError("unknown bitorsor kind");
}

void verify_covering(const CoveringGraph& lift, const MetricGraph& base,
                     const std::vector<int>& anchor, const char* side) {
    for (const auto& e : lift.edges()) {
        int bu = anchor[static_cast<size_t>(e.u)];
        int bv = anchor[static_cast<size_t>(e.v)];
        if (!base.adjacent(bu, bv))
            throw StructuralError(std::string("lifted edge does not project to a ") + side +
                                  " edge at q=" + std::to_string(e.u));
        if (std::abs(base.edge_length(bu, bv) - e.length) > 1e-12)
            throw StructuralError(std::string("lifted edge length disagrees with the ") +
                                  side + " edge at q=" + std::to_string(e.u));
    }
    for (int q = 0; q < lift.vertex_count(); ++q) {
        const auto& down = base.neighbors(anchor[static_cast<size_t>(q)]);
        const auto& up = lift.neighbors(q);
        if (up.size() != down.size())
            throw StructuralError(std::string("covering degree mismatch over the ") + side +
                                  " graph at q=" + std::to_string(q));
        for (const auto& [bn, blen] : down) {
            int count = 0;
            for (const auto& [qn, qlen] : up) {
                (void)qlen;
                if (anchor[static_cast<size_t>(qn)] == bn) ++count;
            }
            (void)blen;
            if (count != 1)
                throw StructuralError(std::string("edge over the ") + side +
                                      " graph lifts " + std::to_string(count) +
                                      " times at q=" + std::to_string(q));
        }
    }
}

}  // namespace

CoveringGraph lift_graph(const MoritaBitorsor& b, const MetricGraph& x_graph,
                         const MetricGraph& y_graph, const MetricGraph* middle_graph) {
    if (x_graph.vertex_count() != b.right_groupoid()->points())
        throw StructuralError("x graph does not match the right base");
    if (y_graph.vertex_count() != b.left_groupoid()->points())
        throw StructuralError("y graph does not match the left base");
    CoveringGraph lift(b.q_count(), derive_lift_edges(b, x_graph, y_graph, middle_graph));
    std::vector<int> rho(static_cast<size_t>(b.q_count()));
    std::vector<int> alpha(static_cast<size_t>(b.q_count()));
    for (int q = 0; q < b.q_count(); ++q) {
        rho[static_cast<size_t>(q)] = b.rho(q);
        alpha[static_cast<size_t>(q)] = b.alpha(q);
    }
    verify_covering(lift, x_graph, rho, "x");
    verify_covering(lift, y_graph, alpha, "y");
    return lift;
}

}  // namespace ncorb
