#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "ncorb/group.hpp"

namespace ncorb {

/// Normalization of the fiberwise sums used throughout: Counting sums with
/// weight 1, Normalized divides every fiber sum by the group order.
enum class HaarConvention { Counting, Normalized };

const char* to_string(HaarConvention c);

/// The action groupoid of a finite group action.  Arrows are pairs (g, x)
/// with source x and target g.x, indexed as g * points + x.  Composition
/// (g2, x2) o (g1, x1) is defined when x2 = g1.x1 and equals (g2 g1, x1):
/// arrows compose like functions, right to left.
class ActionGroupoid {
public:
    explicit ActionGroupoid(GroupAction action,
                            HaarConvention haar = HaarConvention::Counting);

    const GroupAction& action() const { return action_; }
    const FiniteGroup& group() const { return action_.group(); }
    HaarConvention haar() const { return haar_; }
    int points() const { return action_.points(); }
    int arrows() const { return group().order() * points(); }

    int arrow_id(int g, int x) const;
    int arrow_group(int a) const;
    int arrow_point(int a) const;
    int source(int a) const;
    int target(int a) const;
    /// Composite of a2 after a1; nullopt when source(a2) != target(a1).
    std::optional<int> compose(int a2, int a1) const;
    int inverse(int a) const;
    int unit_arrow(int x) const { return arrow_id(group().identity(), x); }

    /// Arrows with the given source (the fiber of s over x).
    std::vector<int> source_fiber(int x) const;
    /// Arrows with the given target (the fiber of t over x).
    std::vector<int> target_fiber(int x) const;

    /// The weight each arrow carries in a fiber sum under this groupoid's
    /// Haar convention.
    double weight() const;

private:
    GroupAction action_;
    HaarConvention haar_;
};

using GroupoidPtr = std::shared_ptr<const ActionGroupoid>;

inline GroupoidPtr make_groupoid(GroupAction action,
                                 HaarConvention haar = HaarConvention::Counting) {
    return std::make_shared<const ActionGroupoid>(std::move(action), haar);
}

/// Composite of sigma after tau.  Throws when the arrows do not match up,
/// naming both arrows in the message.
int compose_arrows(const ActionGroupoid& gpd, int sigma, int tau);

}  // namespace ncorb
