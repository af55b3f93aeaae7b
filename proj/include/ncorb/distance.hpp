#pragma once

#include <string>
#include <vector>

#include "ncorb/dirac.hpp"
#include "ncorb/orbifold.hpp"

namespace ncorb {

struct SolverOptions {
    int max_iterations = 10000;
    int patience = 50;  // stop after this many steps without relative progress
    double rel_improvement = 1e-8;
};

struct DistanceBracket {
    double lower = 0.0;
    double upper = 0.0;      // infinity when no finite edge chain connects the states
    RealVector certificate;  // feasible coefficients realizing the lower bound
    double certificate_seminorm = 0.0;  // 1 up to rounding, 0 for coincident states
    int iterations = 0;
};

/// Connes distance between the vector states at two vertices, over real
/// point functions: sup of a(x') - a(x) subject to the weighted operator
/// norm of [D, a] being at most 1.  The lower bound is certified by a
/// feasible function found by supergradient ascent on the ratio; the upper
/// bound telescopes per-edge Lipschitz constants through Dijkstra.
DistanceBracket connes_distance(const SpectralTripleData& t, int x, int x_prime,
                                const SolverOptions& opt = {});

/// The same extremal problem over the invariant subalgebra with the
/// seminorm compressed to the invariant subspace; states are labeled by
/// orbit indices.  The upper bound runs over the orbit graph with Lipschitz
/// constants taken over invariant test sections localized on single orbits.
DistanceBracket connes_distance_invariant(const SpectralTripleData& t, int orbit,
                                          int orbit_prime, const SolverOptions& opt = {});

/// Geodesic distance between the orbits of two vertices.
double geodesic_oracle(const DiscreteOrbifold& orb, int x, int x_prime);

/// Throws ContractError unless the singular locus is pointlike (no two
/// singular vertices adjacent, no edge fixed pointwise).
void require_pointlike(const DiscreteOrbifold& orb);

/// The reflection fixture: circle of n vertices (circumference 2 pi) under
/// the dihedral flip, rank-2 parity-swap bundle, forward/backward stencil
/// with its grading dropped (the flip reverses chirality).  n even, >= 6.
SpectralTripleData reflection_triple(int n, HaarConvention haar);

struct Theorem3Row {
    int size = 0;
    double spectral_lower = 0.0;
    double spectral_upper = 0.0;
    double geodesic = 0.0;
    double rel_error = 0.0;
};

struct Theorem3Endpoint {
    std::string label;
    std::vector<Theorem3Row> rows;
    int trend_violations = 0;  // rel error increases beyond the 1e-9 floor
    bool converged = false;    // rel error at the finest size within the bound
    bool passed = false;
};

struct Theorem3Report {
    std::vector<int> sizes;
    Theorem3Endpoint antipodal;  // orbits of 0 and n/2, geodesic pi
    Theorem3Endpoint adjacent;   // orbits of 1 and 2, geodesic 2 pi / n
    double companion_residual = 0.0;  // rotation invariant distance vs the
                                      // quotient circle distance
    bool passed = false;
    std::string failure;
};

/// Spectral-versus-geodesic convergence over the reflection family, plus
/// the rotation companion where the invariant distance must reproduce the
/// quotient circle distance outright.
Theorem3Report theorem3_harness(const std::vector<int>& sizes, HaarConvention haar,
                                double rel_error_bound = 0.10,
                                const SolverOptions& opt = {},
                                double companion_tolerance = 1e-8);

}  // namespace ncorb
