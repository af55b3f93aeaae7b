#include "ncorb/group.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace ncorb {

FiniteGroup::FiniteGroup(std::vector<std::vector<int>> table) : table_(std::move(table)) {
    const int n = static_cast<int>(table_.size());
    if (n == 0) throw StructuralError("group table is empty");
    for (const auto& row : table_) {
        if (static_cast<int>(row.size()) != n)
            throw StructuralError("group table is not square");
        for (int v : row) {
            if (v < 0 || v >= n) throw StructuralError("group table entry out of range");
        }
    }
    // Locate the two-sided identity.
    identity_ = -1;
    for (int e = 0; e < n; ++e) {
        bool ok = true;
        for (int g = 0; g < n && ok; ++g) {
            ok = table_[static_cast<size_t>(e)][static_cast<size_t>(g)] == g &&
                 table_[static_cast<size_t>(g)][static_cast<size_t>(e)] == g;
        }
        if (ok) {
            identity_ = e;
            break;
        }
    }
    if (identity_ < 0) throw StructuralError("group table has no identity");
    // Inverses.
    inverse_.assign(static_cast<size_t>(n), -1);
    for (int g = 0; g < n; ++g) {
        for (int h = 0; h < n; ++h) {
            if (table_[static_cast<size_t>(g)][static_cast<size_t>(h)] == identity_ &&
                table_[static_cast<size_t>(h)][static_cast<size_t>(g)] == identity_) {
                inverse_[static_cast<size_t>(g)] = h;
                break;
            }
        }
        if (inverse_[static_cast<size_t>(g)] < 0)
            throw StructuralError("group element has no inverse");
    }
    // Associativity, checked in full; group orders here are tiny.
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                if (multiply(multiply(a, b), c) != multiply(a, multiply(b, c)))
                    throw StructuralError("group table is not associative");
}

int FiniteGroup::check(int g) const {
    if (g < 0 || g >= order()) throw ContractError("group element out of range");
    return g;
}

int FiniteGroup::multiply(int g, int h) const {
    return table_[static_cast<size_t>(check(g))][static_cast<size_t>(check(h))];
}

bool FiniteGroup::is_abelian() const {
    for (int g = 0; g < order(); ++g)
        for (int h = 0; h < g; ++h)
            if (multiply(g, h) != multiply(h, g)) return false;
    return true;
}

FiniteGroup FiniteGroup::trivial() { return cyclic(1); }

FiniteGroup FiniteGroup::cyclic(int n) {
    if (n <= 0) throw StructuralError("cyclic group order must be positive");
    std::vector<std::vector<int>> t(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h) t[static_cast<size_t>(g)][static_cast<size_t>(h)] = (g + h) % n;
    return FiniteGroup(std::move(t));
}

namespace {

std::vector<std::array<int, 3>> s3_perms() {
    std::vector<std::array<int, 3>> p;
    std::array<int, 3> base = {0, 1, 2};
    do {
        p.push_back(base);
    } while (std::next_permutation(base.begin(), base.end()));
    return p;
}

}  // namespace

FiniteGroup FiniteGroup::s3() {
    auto perms = s3_perms();
    const int n = static_cast<int>(perms.size());
    auto index_of = [&](const std::array<int, 3>& q) {
        for (int i = 0; i < n; ++i)
            if (perms[static_cast<size_t>(i)] == q) return i;
        throw StructuralError("permutation lookup failed");
    };
    std::vector<std::vector<int>> t(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int g = 0; g < n; ++g) {
        for (int h = 0; h < n; ++h) {
            std::array<int, 3> comp;
            for (int i = 0; i < 3; ++i)
                comp[static_cast<size_t>(i)] =
                    perms[static_cast<size_t>(g)][static_cast<size_t>(
                        perms[static_cast<size_t>(h)][static_cast<size_t>(i)])];
            t[static_cast<size_t>(g)][static_cast<size_t>(h)] = index_of(comp);
        }
    }
    return FiniteGroup(std::move(t));
}

GroupAction::GroupAction(FiniteGroup group, std::vector<std::vector<int>> act)
    : group_(std::move(group)), act_(std::move(act)) {
    if (static_cast<int>(act_.size()) != group_.order())
        throw StructuralError("action table must have one row per group element");
    const int n = points();
    if (n == 0) throw StructuralError("action on empty point set");
    for (const auto& row : act_) {
        if (static_cast<int>(row.size()) != n)
            throw StructuralError("action table rows must have equal length");
        for (int v : row)
            if (v < 0 || v >= n) throw StructuralError("action table entry out of range");
    }
    for (int x = 0; x < n; ++x)
        if (apply(group_.identity(), x) != x)
            throw StructuralError("identity must act trivially");
    for (int g = 0; g < group_.order(); ++g)
        for (int h = 0; h < group_.order(); ++h)
            for (int x = 0; x < n; ++x)
                if (apply(group_.multiply(g, h), x) != apply(g, apply(h, x)))
                    throw StructuralError("action table violates compatibility");
}

int GroupAction::apply(int g, int x) const {
    if (g < 0 || g >= group_.order()) throw ContractError("group element out of range");
    if (x < 0 || x >= points()) throw ContractError("point out of range");
    return act_[static_cast<size_t>(g)][static_cast<size_t>(x)];
}

std::vector<std::vector<int>> GroupAction::orbits() const {
    std::vector<std::vector<int>> out;
    std::vector<bool> seen(static_cast<size_t>(points()), false);
    for (int x = 0; x < points(); ++x) {
        if (seen[static_cast<size_t>(x)]) continue;
        std::vector<int> orbit;
        for (int g = 0; g < group_.order(); ++g) {
            int y = apply(g, x);
            if (!seen[static_cast<size_t>(y)]) {
                seen[static_cast<size_t>(y)] = true;
                orbit.push_back(y);
            }
        }
        std::sort(orbit.begin(), orbit.end());
        out.push_back(std::move(orbit));
    }
    return out;
}

std::vector<int> GroupAction::orbit_of(int x) const {
    std::vector<int> orbit;
    std::vector<bool> seen(static_cast<size_t>(points()), false);
    for (int g = 0; g < group_.order(); ++g) {
        int y = apply(g, x);
        if (!seen[static_cast<size_t>(y)]) {
            seen[static_cast<size_t>(y)] = true;
            orbit.push_back(y);
        }
    }
    std::sort(orbit.begin(), orbit.end());
    return orbit;
}

std::vector<int> GroupAction::orbit_representatives() const {
    std::vector<int> reps;
    for (const auto& orbit : orbits()) reps.push_back(orbit.front());
    std::sort(reps.begin(), reps.end());
    return reps;
}

std::vector<int> GroupAction::orbit_index() const {
    auto reps = orbit_representatives();
    std::vector<int> idx(static_cast<size_t>(points()), -1);
    for (size_t k = 0; k < reps.size(); ++k)
        for (int y : orbit_of(reps[k])) idx[static_cast<size_t>(y)] = static_cast<int>(k);
    return idx;
}

std::vector<int> GroupAction::stabilizer(int x) const {
    std::vector<int> out;
    for (int g = 0; g < group_.order(); ++g)
        if (apply(g, x) == x) out.push_back(g);
    return out;
}

bool GroupAction::is_free() const {
    for (int x = 0; x < points(); ++x)
        if (stabilizer(x).size() != 1) return false;
    return true;
}

bool GroupAction::is_effective() const {
    for (int g = 0; g < group_.order(); ++g) {
        if (g == group_.identity()) continue;
        bool moves = false;
        for (int x = 0; x < points(); ++x)
            if (apply(g, x) != x) {
                moves = true;
                break;
            }
        if (!moves) return false;
    }
    return true;
}

GroupAction GroupAction::reflection_cycle(int n) {
    if (n <= 0) throw StructuralError("cycle length must be positive");
    std::vector<std::vector<int>> act(2, std::vector<int>(static_cast<size_t>(n)));
    for (int x = 0; x < n; ++x) {
        act[0][static_cast<size_t>(x)] = x;
        act[1][static_cast<size_t>(x)] = ((n - x) % n + n) % n;
    }
    return GroupAction(FiniteGroup::z2(), std::move(act));
}

GroupAction GroupAction::rotation_cycle(int n, int m) {
    if (n <= 0 || m <= 0 || n % m != 0)
        throw StructuralError("rotation subgroup order must divide the cycle length");
    const int step = n / m;
    std::vector<std::vector<int>> act(static_cast<size_t>(m), std::vector<int>(static_cast<size_t>(n)));
    for (int g = 0; g < m; ++g)
        for (int x = 0; x < n; ++x) act[static_cast<size_t>(g)][static_cast<size_t>(x)] = (x + g * step) % n;
    return GroupAction(FiniteGroup::cyclic(m), std::move(act));
}

GroupAction GroupAction::trivial_on(int n, int m) {
    std::vector<std::vector<int>> act(static_cast<size_t>(m), std::vector<int>(static_cast<size_t>(n)));
    for (int g = 0; g < m; ++g)
        for (int x = 0; x < n; ++x) act[static_cast<size_t>(g)][static_cast<size_t>(x)] = x;
    return GroupAction(FiniteGroup::cyclic(m), std::move(act));
}

GroupAction GroupAction::left_translation(const FiniteGroup& g) {
    const int n = g.order();
    std::vector<std::vector<int>> act(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int x = 0; x < n; ++x) act[static_cast<size_t>(a)][static_cast<size_t>(x)] = g.multiply(a, x);
    return GroupAction(g, std::move(act));
}

GroupAction GroupAction::s3_on_c6() {
    // Generators on Z/6: rotation by 2 and negation.  Their closure is a
    // 6-element dihedral group isomorphic to S3.
    auto rot = [](int x) { return (x + 2) % 6; };
    auto ref = [](int x) { return (6 - x) % 6; };
    std::vector<std::vector<int>> elems;
    std::vector<int> id(6);
    std::iota(id.begin(), id.end(), 0);
    elems.push_back(id);
    for (size_t i = 0; i < elems.size(); ++i) {
        for (int which = 0; which < 2; ++which) {
            std::vector<int> next(6);
            for (int x = 0; x < 6; ++x)
                next[static_cast<size_t>(x)] =
                    which == 0 ? rot(elems[i][static_cast<size_t>(x)]) : ref(elems[i][static_cast<size_t>(x)]);
            if (std::find(elems.begin(), elems.end(), next) == elems.end()) elems.push_back(next);
        }
    }
    if (elems.size() != 6) throw StructuralError("dihedral closure on the 6-cycle has wrong size");
    std::sort(elems.begin(), elems.end());
    auto index_of = [&](const std::vector<int>& p) {
        auto it = std::find(elems.begin(), elems.end(), p);
        if (it == elems.end()) throw StructuralError("closure is not a group");
        return static_cast<int>(it - elems.begin());
    };
    const int n = 6;
    std::vector<std::vector<int>> table(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n)));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            std::vector<int> comp(6);
            for (int x = 0; x < 6; ++x)
                comp[static_cast<size_t>(x)] =
                    elems[static_cast<size_t>(a)][static_cast<size_t>(
                        elems[static_cast<size_t>(b)][static_cast<size_t>(x)])];
            table[static_cast<size_t>(a)][static_cast<size_t>(b)] = index_of(comp);
        }
    FiniteGroup grp(std::move(table));
    std::vector<std::vector<int>> act(static_cast<size_t>(n), std::vector<int>(6));
    for (int a = 0; a < n; ++a)
        for (int x = 0; x < 6; ++x) act[static_cast<size_t>(a)][static_cast<size_t>(x)] = elems[static_cast<size_t>(a)][static_cast<size_t>(x)];
    return GroupAction(std::move(grp), std::move(act));
}

}  // namespace ncorb
