#pragma once

#include <string>
#include <vector>

#include "ncorb/linalg.hpp"

namespace ncorb {

/// A finite group given by its multiplication table.  Elements are labelled
/// 0..order-1; table[g][h] = g*h.  The constructor validates the full set of
/// group axioms, so holding a FiniteGroup means holding an actual group.
class FiniteGroup {
public:
    explicit FiniteGroup(std::vector<std::vector<int>> table);

    int order() const { return static_cast<int>(table_.size()); }
    int identity() const { return identity_; }
    int multiply(int g, int h) const;
    int inverse(int g) const { return inverse_[static_cast<size_t>(check(g))]; }
    bool is_abelian() const;

    static FiniteGroup trivial();
    static FiniteGroup cyclic(int n);
    static FiniteGroup z2() { return cyclic(2); }
    /// Symmetric group on 3 letters; element k encodes the permutation of
    /// {0,1,2} at lexicographic index k.
    static FiniteGroup s3();

private:
    int check(int g) const;
    std::vector<std::vector<int>> table_;
    int identity_ = 0;
    std::vector<int> inverse_;
};

/// A left action of a finite group on points 0..n_points-1.
/// act[g][x] = g.x; validated to be an action by unit and compatibility laws.
class GroupAction {
public:
    GroupAction(FiniteGroup group, std::vector<std::vector<int>> act);

    const FiniteGroup& group() const { return group_; }
    int points() const { return static_cast<int>(act_.empty() ? 0 : act_[0].size()); }
    int apply(int g, int x) const;

    std::vector<std::vector<int>> orbits() const;
    std::vector<int> orbit_of(int x) const;
    /// Chooses the minimal point of each orbit as its representative.
    std::vector<int> orbit_representatives() const;
    /// Index of the orbit of x in the orbit_representatives ordering.
    std::vector<int> orbit_index() const;
    std::vector<int> stabilizer(int x) const;
    bool is_free() const;
    bool is_effective() const;

    /// Z/2 acting on the n-cycle by j -> -j mod n.
    static GroupAction reflection_cycle(int n);
    /// Z/m acting on the n-cycle by j -> j + n/m mod n (requires m | n).
    static GroupAction rotation_cycle(int n, int m);
    /// The trivial action of Z/m on n points.
    static GroupAction trivial_on(int n, int m);
    /// A finite group acting on itself by left translation.
    static GroupAction left_translation(const FiniteGroup& g);
    /// S3 as the dihedral subgroup of the 6-cycle generated by
    /// j -> j+2 and j -> -j.
    static GroupAction s3_on_c6();

private:
    FiniteGroup group_;
    std::vector<std::vector<int>> act_;
};

}  // namespace ncorb
