#include "ncorb/distance.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace ncorb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> dijkstra(int n, const std::vector<std::vector<std::pair<int, double>>>& adj,
                             int source) {
    std::vector<double> dist(static_cast<size_t>(n), kInf);
    dist[static_cast<size_t>(source)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    queue.push({0.0, source});
    while (!queue.empty()) {
        auto [d0, u] = queue.top();
        queue.pop();
        if (d0 > dist[static_cast<size_t>(u)]) continue;
        for (auto [v, w] : adj[static_cast<size_t>(u)]) {
            if (d0 + w < dist[static_cast<size_t>(v)]) {
                dist[static_cast<size_t>(v)] = d0 + w;
                queue.push({d0 + w, v});
            }
        }
    }
    return dist;
}

struct ExtremalProblem {
    std::vector<Matrix> mats;  // seminorm generators in orthonormal coordinates
    RealVector direction;
    RealVector start;
};

Matrix assemble(const std::vector<Matrix>& mats, const RealVector& a) {
    Matrix m = Matrix::Zero(mats.front().rows(), mats.front().cols());
    for (size_t k = 0; k < mats.size(); ++k) m += a(static_cast<Eigen::Index>(k)) * mats[k];
    return m;
}

double top_singular(const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Maximize direction . a / ||sum a_k mats_k|| by supergradient ascent on the
/// log ratio, then rescale the best candidate to exact feasibility.  The
/// objective is invariant under constant shifts, so iterates stay mean-free.
DistanceBracket ascend(const ExtremalProblem& p, const SolverOptions& opt) {
    DistanceBracket out;
    const Eigen::Index k = p.direction.size();
    auto demean = [](RealVector& a) { a.array() -= a.mean(); };

    RealVector a = p.start;
    demean(a);
    if (p.direction.dot(a) < 0) a = -a;
    if (p.direction.dot(a) <= 0) {
        a = p.direction;
        demean(a);
    }

    double best_ratio = 0.0;
    RealVector best_a = a;
    int stall = 0;
    int steps = 0;
    for (; steps < opt.max_iterations; ++steps) {
        Matrix m = assemble(p.mats, a);
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        double sigma = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        double ca = p.direction.dot(a);
        if (!(sigma > 0.0)) {
            if (ca > 0.0) {
                // A separating direction with vanishing seminorm: the
                // supremum is unbounded.
                out.lower = kInf;
                out.upper = kInf;
                out.certificate = a;
                out.iterations = steps;
                return out;
            }
            a = p.direction;
            demean(a);
            continue;
        }
        if (ca <= 0.0) {
            a = best_a;
            if (++stall >= opt.patience) break;
            continue;
        }
        double ratio = ca / sigma;
        if (ratio > best_ratio + opt.rel_improvement * std::max(best_ratio, 1e-300)) {
            best_ratio = ratio;
            best_a = a;
            stall = 0;
        } else if (++stall >= opt.patience) {
            ++steps;
            break;
        }
        RealVector slope(k);
        for (Eigen::Index i = 0; i < k; ++i)
            slope(i) =
                (svd.matrixU().col(0).adjoint() * p.mats[static_cast<size_t>(i)] *
                 svd.matrixV().col(0))(0, 0)
                    .real();
        RealVector grad = p.direction / ca - slope / sigma;
        double gn = grad.norm();
        if (gn <= 1e-15) {
            ++steps;
            break;
        }
        double anorm = a.norm();
        if (anorm <= 0.0) anorm = 1.0;
        a += (0.5 / (1.0 + static_cast<double>(steps) / 40.0)) * (anorm / gn) * grad;
        demean(a);
    }

    double sigma_best = top_singular(assemble(p.mats, best_a));
    out.iterations = steps;
    if (!(sigma_best > 0.0)) {
        out.certificate = RealVector::Zero(k);
        return out;
    }
    out.certificate = best_a / sigma_best;
    out.lower = p.direction.dot(out.certificate);
    out.certificate_seminorm = top_singular(assemble(p.mats, out.certificate));
    return out;
}

}  // namespace

DistanceBracket connes_distance(const SpectralTripleData& t, int x, int x_prime,
                                const SolverOptions& opt) {
    const DiracOperator& d = t.dirac();
    const MetricGraph& g = *d.graph();
    const int points = g.vertex_count();
    if (x < 0 || x >= points || x_prime < 0 || x_prime >= points)
        throw ContractError("vertex out of range");
    if (x == x_prime) {
        DistanceBracket b;
        b.certificate = RealVector::Zero(points);
        return b;
    }

    const int r = d.rank();
    const Eigen::Index dim = d.matrix().rows();
    RealVector w = d.weights();
    const Matrix& dm = d.matrix();

    ExtremalProblem p;
    p.mats.reserve(static_cast<size_t>(points));
    for (int v = 0; v < points; ++v) {
        Matrix c = Matrix::Zero(dim, dim);
        for (Eigen::Index row = 0; row < dim; ++row) {
            for (Eigen::Index col = 0; col < dim; ++col) {
                int vi = static_cast<int>(row) / r;
                int vj = static_cast<int>(col) / r;
                double diff = (vj == v ? 1.0 : 0.0) - (vi == v ? 1.0 : 0.0);
                if (diff == 0.0 || dm(row, col) == Complex(0.0)) continue;
                c(row, col) = std::sqrt(w(row) / w(col)) * dm(row, col) * diff;
            }
        }
        p.mats.push_back(std::move(c));
    }
    p.direction = RealVector::Zero(points);
    p.direction(x_prime) = 1.0;
    p.direction(x) = -1.0;
    auto to_target = g.shortest_paths(x_prime);
    p.start = RealVector(points);
    for (int v = 0; v < points; ++v) p.start(v) = -to_target[static_cast<size_t>(v)];

    DistanceBracket bracket = ascend(p, opt);

    // Per-edge Lipschitz constants: any feasible function changes by at most
    // the inverse weighted block norm across an edge.
    const RealVector& nu = d.nu();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(points));
    for (const Edge& e : g.edges()) {
        double c = std::sqrt(nu(e.u) / nu(e.v)) * operator_norm(d.block(e.u, e.v));
        if (c <= 0.0) continue;
        adj[static_cast<size_t>(e.u)].push_back({e.v, 1.0 / c});
        adj[static_cast<size_t>(e.v)].push_back({e.u, 1.0 / c});
    }
    bracket.upper = dijkstra(points, adj, x)[static_cast<size_t>(x_prime)];
    return bracket;
}

DistanceBracket connes_distance_invariant(const SpectralTripleData& t, int orbit,
                                          int orbit_prime, const SolverOptions& opt) {
    const GroupAction& act = t.groupoid()->action();
    const auto orbits = act.orbits();
    const int n_orb = static_cast<int>(orbits.size());
    if (orbit < 0 || orbit >= n_orb || orbit_prime < 0 || orbit_prime >= n_orb)
        throw ContractError("orbit index out of range");
    if (orbit == orbit_prime) {
        DistanceBracket b;
        b.certificate = RealVector::Zero(n_orb);
        return b;
    }

    const DiracOperator& d = t.dirac();
    const MetricGraph& g = *d.graph();
    const int r = t.bundle().rank();
    RealVector w = t.weights();
    const Matrix& dm = d.matrix();
    InvariantTriple inv = invariant_triple(t);
    const Matrix& basis = inv.basis;
    Matrix bw = basis.adjoint() * w.asDiagonal();
    const Eigen::Index m = basis.cols();
    const auto oi = act.orbit_index();

    // Compressed commutator generators, accumulated from the edge blocks of
    // the Dirac matrix: the commutator with an orbit indicator is supported
    // on edges leaving that orbit.
    ExtremalProblem p;
    p.mats.assign(static_cast<size_t>(n_orb), Matrix::Zero(m, m));
    auto add_block = [&](int u, int v) {
        int zu = oi[static_cast<size_t>(u)];
        int zv = oi[static_cast<size_t>(v)];
        if (zu == zv) return;
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < r; ++j) {
                Complex val = dm(u * r + i, v * r + j);
                if (val == Complex(0.0)) continue;
                Matrix outer = val * (bw.col(u * r + i) * basis.row(v * r + j));
                p.mats[static_cast<size_t>(zv)] += outer;
                p.mats[static_cast<size_t>(zu)] -= outer;
            }
        }
    };
    for (const Edge& e : g.edges()) {
        add_block(e.u, e.v);
        add_block(e.v, e.u);
    }

    p.direction = RealVector::Zero(n_orb);
    p.direction(orbit_prime) = 1.0;
    p.direction(orbit) = -1.0;
    DiscreteOrbifold orb(g, act);
    p.start = RealVector(n_orb);
    for (int z = 0; z < n_orb; ++z)
        p.start(z) = -orbifold_distance(orb, orbits[static_cast<size_t>(z)].front(),
                                        orbits[static_cast<size_t>(orbit_prime)].front());

    DistanceBracket bracket = ascend(p, opt);

    // Orbit-pair Lipschitz constants over invariant sections localized on a
    // single orbit: averages of the delta sections at one representative.
    std::vector<Matrix> local(static_cast<size_t>(n_orb));
    const SpinorBundle& bundle = t.bundle();
    const int order = t.groupoid()->group().order();
    for (int z = 0; z < n_orb; ++z) {
        int rep = orbits[static_cast<size_t>(z)].front();
        Matrix raw = Matrix::Zero(basis.rows(), r);
        for (int gi = 0; gi < order; ++gi)
            raw.block(act.apply(gi, rep) * r, 0, r, r) += bundle.rho(gi, rep);
        Matrix gram = raw.adjoint() * w.asDiagonal() * raw;
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        double top = es.eigenvalues().maxCoeff();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            if (es.eigenvalues()(i) > 1e-10 * top) keep.push_back(i);
        Matrix cols(gram.rows(), static_cast<Eigen::Index>(keep.size()));
        for (size_t i = 0; i < keep.size(); ++i)
            cols.col(static_cast<Eigen::Index>(i)) =
                es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()(keep[i]));
        local[static_cast<size_t>(z)] = raw * cols;
    }
    double dscale = dm.cwiseAbs().maxCoeff();
    Matrix wd = w.asDiagonal() * dm;
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(n_orb));
    for (int za = 0; za < n_orb; ++za) {
        for (int zb = za + 1; zb < n_orb; ++zb) {
            if (local[static_cast<size_t>(za)].cols() == 0 ||
                local[static_cast<size_t>(zb)].cols() == 0)
                continue;
            double c = operator_norm(local[static_cast<size_t>(za)].adjoint() * wd *
                                     local[static_cast<size_t>(zb)]);
            if (c <= 1e-12 * dscale) continue;
            adj[static_cast<size_t>(za)].push_back({zb, 1.0 / c});
            adj[static_cast<size_t>(zb)].push_back({za, 1.0 / c});
        }
    }
    bracket.upper = dijkstra(n_orb, adj, orbit)[static_cast<size_t>(orbit_prime)];
    return bracket;
}

double geodesic_oracle(const DiscreteOrbifold& orb, int x, int x_prime) {
    return orbifold_distance(orb, x, x_prime);
}

void require_pointlike(const DiscreteOrbifold& orb) {
    if (!singular_locus(orb).pointlike)
        throw ContractError(
            "the singular locus is not pointlike: singular vertices touch or an edge is "
            "fixed pointwise");
}

SpectralTripleData reflection_triple(int n, HaarConvention haar) {
    if (n < 6 || n % 2 != 0)
        throw StructuralError("the reflection fixture needs an even cycle of at least 6 vertices");
    constexpr double tau = 2.0 * std::numbers::pi_v<double>;
    auto graph = std::make_shared<const MetricGraph>(refine_circle(n, tau));
    auto theta = make_groupoid(GroupAction::reflection_cycle(n), haar);
    auto bundle = std::make_shared<const SpinorBundle>(SpinorBundle::parity_swap(theta));
    return SpectralTripleData(theta, bundle, drop_grading(circle_dirac(graph, 2)), 1);
}

Theorem3Report theorem3_harness(const std::vector<int>& sizes, HaarConvention haar,
                                double rel_error_bound, const SolverOptions& opt,
                                double companion_tolerance) {
    if (sizes.size() < 2) throw StructuralError("the harness needs at least two sizes");
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 8 || sizes[i] % 2 != 0)
            throw StructuralError("family sizes must be even and at least 8");
        if (i > 0 && sizes[i] <= sizes[i - 1])
            throw StructuralError("family sizes must increase");
    }

    Theorem3Report rep;
    rep.sizes = sizes;
    rep.antipodal.label = "antipodal";
    rep.adjacent.label = "adjacent";
    for (int n : sizes) {
        SpectralTripleData t = reflection_triple(n, haar);
        DiscreteOrbifold orb(*t.dirac().graph(), t.groupoid()->action());
        require_pointlike(orb);
        const auto oi = t.groupoid()->action().orbit_index();
        auto run = [&](int a, int b, Theorem3Endpoint& ep) {
            DistanceBracket br = connes_distance_invariant(t, oi[static_cast<size_t>(a)],
                                                           oi[static_cast<size_t>(b)], opt);
            double geo = orbifold_distance(orb, a, b);
            ep.rows.push_back(
                {n, br.lower, br.upper, geo, std::abs(br.lower - geo) / geo});
        };
        run(0, n / 2, rep.antipodal);
        run(1, 2, rep.adjacent);
    }
    auto finish = [&](Theorem3Endpoint& ep) {
        for (size_t i = 0; i + 1 < ep.rows.size(); ++i)
            if (ep.rows[i + 1].rel_error > ep.rows[i].rel_error + 1e-9) ++ep.trend_violations;
        ep.converged = ep.rows.back().rel_error <= rel_error_bound;
        ep.passed = ep.converged && ep.trend_violations <= 1;
    };
    finish(rep.antipodal);
    finish(rep.adjacent);

    // Rotation companion: the invariant distance upstairs must reproduce the
    // quotient circle distance outright, not merely in the limit.
    constexpr double tau = 2.0 * std::numbers::pi_v<double>;
    auto theta = make_groupoid(GroupAction::rotation_cycle(6, 2), haar);
    auto x_graph = std::make_shared<const MetricGraph>(refine_circle(6, tau));
    SpectralTripleData rotation(
        theta, std::make_shared<const SpinorBundle>(SpinorBundle::trivial(theta, 1)),
        circle_dirac(x_graph, 1), 1);
    auto xi = make_groupoid(GroupAction::trivial_on(3, 1), haar);
    auto y_graph = std::make_shared<const MetricGraph>(refine_circle(3, tau / 2.0));
    SpectralTripleData quotient(
        xi, std::make_shared<const SpinorBundle>(SpinorBundle::trivial(xi, 1)),
        circle_dirac(y_graph, 1), 1);
    double upstairs = connes_distance_invariant(rotation, 0, 1, opt).lower;
    double downstairs = connes_distance(quotient, 0, 1, opt).lower;
    rep.companion_residual = std::abs(upstairs - downstairs);

    if (!rep.antipodal.passed || !rep.adjacent.passed) {
        const auto& bad = rep.antipodal.passed ? rep.adjacent : rep.antipodal;
        std::ostringstream msg;
        msg << bad.label << " endpoint: rel error " << bad.rows.back().rel_error
            << " at the finest size with " << bad.trend_violations << " trend violations";
        rep.failure = msg.str();
    } else if (rep.companion_residual > companion_tolerance) {
        std::ostringstream msg;
        msg << "companion residual " << rep.companion_residual << " exceeds "
            << companion_tolerance;
        rep.failure = msg.str();
    } else {
        rep.passed = true;
    }
    return rep;
}

}  // namespace ncorb
