#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncorb/graph.hpp"
#include "ncorb/groupoid.hpp"

namespace ncorb {

enum class BitorsorKind { Generic, Identity, Quotient, Dual, Composed };

/// A biprincipal bibundle between two action groupoids: a finite space Q
/// with anchors alpha: Q -> Y (left base) and rho: Q -> X (right base), a
/// left action of Xi = K x Y and a right action of Theta = G x X, mutually
/// commuting, each free and transitive on the fibers of the other anchor.
///
/// Action tables store -1 where the action is undefined; the left action of
/// arrow tau is defined exactly on {q : s(tau) = alpha(q)}, the right action
/// of sigma exactly on {q : t(sigma) = rho(q)}.
class MoritaBitorsor {
public:
    MoritaBitorsor(GroupoidPtr left, GroupoidPtr right, int q_count,
                   std::vector<int> alpha, std::vector<int> rho,
                   std::vector<std::vector<int>> left_action,
                   std::vector<std::vector<int>> right_action,
                   std::vector<Edge> explicit_q_edges = {});

    const GroupoidPtr& left_groupoid() const { return left_; }
    const GroupoidPtr& right_groupoid() const { return right_; }
    int q_count() const { return q_count_; }
    int alpha(int q) const;
    int rho(int q) const;
    std::optional<int> left_act(int tau, int q) const;
    std::optional<int> right_act(int q, int sigma) const;

    std::vector<int> alpha_fiber(int y) const;
    std::vector<int> rho_fiber(int x) const;
    /// Smallest torsor point in the alpha fiber of y (the canonical section).
    int q_star(int y) const;
    /// The unique right arrow sigma with q . sigma = q_target; both points
    /// must lie in one alpha fiber of a validated bitorsor.
    int sigma_between(int q, int q_target) const;

    BitorsorKind kind() const { return kind_; }
    const std::shared_ptr<const MoritaBitorsor>& parent_left() const { return parent_left_; }
    const std::shared_ptr<const MoritaBitorsor>& parent_right() const { return parent_right_; }
    /// For Composed: one representative (p-point, q-point) per class.
    const std::vector<std::pair<int, int>>& class_representatives() const {
        return class_reps_;
    }
    const std::vector<Edge>& explicit_q_edges() const { return explicit_q_edges_; }

private:
    friend MoritaBitorsor identity_bitorsor(const GroupoidPtr&);
    friend MoritaBitorsor quotient_bitorsor(const GroupoidPtr&);
    friend MoritaBitorsor dual_bitorsor(std::shared_ptr<const MoritaBitorsor>);
    friend MoritaBitorsor compose_bitorsors(std::shared_ptr<const MoritaBitorsor>,
                                            std::shared_ptr<const MoritaBitorsor>);

    GroupoidPtr left_;
    GroupoidPtr right_;
    int q_count_;
    std::vector<int> alpha_;
    std::vector<int> rho_;
    std::vector<std::vector<int>> lact_;  // [xi-arrow][q]
    std::vector<std::vector<int>> ract_;  // [theta-arrow][q]
    BitorsorKind kind_ = BitorsorKind::Generic;
    std::shared_ptr<const MoritaBitorsor> parent_left_;
    std::shared_ptr<const MoritaBitorsor> parent_right_;
    std::vector<std::pair<int, int>> class_reps_;
    std::vector<Edge> explicit_q_edges_;
};

using BitorsorPtr = std::shared_ptr<const MoritaBitorsor>;

struct ValidationEntry {
    std::string axiom;
    bool passed;
    std::string witness;  // empty on pass
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    bool passed() const;
    std::string first_failure() const;
};

/// Exhaustive check of every bitorsor axiom; failures become report entries
/// with witnesses, never exceptions.
ValidationReport validate_bitorsor(const MoritaBitorsor& b);

/// Throws ContractError with the first failing axiom when invalid.
void ensure_valid(const MoritaBitorsor& b);

struct FiberCardinalities {
    std::vector<int> rho_fibers;   // per x, expected #K
    std::vector<int> alpha_fibers;  // per y, expected #G
};

/// Fiber sizes; throws ContractError when they deviate from #K and #G.
FiberCardinalities fiber_cardinalities(const MoritaBitorsor& b);

/// Q = arrows of Theta, alpha = target, rho = source, both actions by
/// composition.
MoritaBitorsor identity_bitorsor(const GroupoidPtr& theta);

/// The equivalence between a free action groupoid and the trivial groupoid
/// of its orbit space: Q = X, alpha = orbit, rho = identity.  The left
/// groupoid is created here (trivial group on the orbit set, same Haar
/// convention).  Throws ContractError citing the fixed vertices when the
/// action is not free.
MoritaBitorsor quotient_bitorsor(const GroupoidPtr& theta);

/// Swap the two sides; actions are converted through arrow inverses.
MoritaBitorsor dual_bitorsor(BitorsorPtr b);

/// Balanced composition over the shared middle groupoid: pairs with matching
/// middle anchors, modulo the middle action.
MoritaBitorsor compose_bitorsors(BitorsorPtr p, BitorsorPtr q);

/// A bijection Q_a -> Q_b commuting with anchors and both actions, or
/// nullopt.  Both bitorsors must share their groupoid objects.
std::optional<std::vector<int>> bitorsor_isomorphism(const MoritaBitorsor& a,
                                                     const MoritaBitorsor& b);

/// The lifted graph on Q: derived for the canonical constructions (sheets
/// for Identity, the base graph for Quotient, the parent lift for Dual, the
/// representative rule for Composed) or taken from explicit edges; then the
/// covering property of both anchors is verified edge by edge.
/// middle_graph is needed only for Composed.
CoveringGraph lift_graph(const MoritaBitorsor& b, const MetricGraph& x_graph,
                         const MetricGraph& y_graph,
                         const MetricGraph* middle_graph = nullptr);

}  // namespace ncorb
