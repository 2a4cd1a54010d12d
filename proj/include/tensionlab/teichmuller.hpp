#ifndef TENSIONLAB_TEICHMULLER_HPP
#define TENSIONLAB_TEICHMULLER_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "beltrami.hpp"
#include "calculus.hpp"
#include "grid.hpp"
#include "qc_analysis.hpp"

// Distances between marked maps sharing a source grid. The coefficient of
// f o g^{-1} at g(z) is
//   compose_mu(mu_f, mu_g, phase) = ((mu_f - mu_g) / (1 - conj(mu_f) mu_g)) * phase
// with phase = conj(g_z)/g_z, a unimodular factor the modulus ignores; the
// distance is d = log sup K, K = (1 + m)/(1 - m) over the composed modulus m,
// taken on the domain grid with no explicit inversion. On the unit disk of
// parameters, d(a, b) = log (1 + t)/(1 - t) with t = |a - b| / |1 - conj(a) b|
// uses the same log K normalization, so the two are directly comparable.

namespace tensionlab {

inline double hyperbolic_distance(cplx a, cplx b) {
    if (!(std::abs(a) < 1.0) || !(std::abs(b) < 1.0))
        fail("out-of-disk", "hyperbolic distance needs |a|, |b| < 1");
    double t = std::abs(a - b) / std::abs(1.0 - std::conj(a) * b);
    return std::log((1.0 + t) / (1.0 - t));
}

inline cplx compose_mu(cplx mu_f, cplx mu_g, cplx g_phase = cplx(1.0)) {
    cplx den = 1.0 - std::conj(mu_f) * mu_g;
    if (std::abs(den) < 1e-12)
        fail("degenerate", "composition denominator 1 - conj(mu_f) mu_g vanishes");
    return ((mu_f - mu_g) / den) * g_phase;
}

struct DistanceReport {
    double d_teich = 0.0;                 // log sup K
    std::optional<double> d_hyperbolic;   // log K of the parameters, when known
    std::pair<int, int> sup_location{-1, -1};
    double spread = 0.0;                  // sup - inf of log K over nodes
    double k_sup = 0.0, k_inf = 0.0;      // composed |mu| extremes
    long nodes = 0;
};

// Distance from the stored values of two maps on a common grid: both are
// differenced, the coefficients composed pointwise (phase 1 - the modulus is
// all that matters), and log sup K taken over the nodes where both exist.
// Nodes where the composition denominator vanishes are skipped as masked.
inline DistanceReport teich_distance(const Field& map_f, const Field& map_g) {
    if (!map_f.grid.same_as(map_g.grid)) fail("grid-mismatch", "maps live on different grids");
    Field mu_f = beltrami_coefficient(map_f), mu_g = beltrami_coefficient(map_g);
    DistanceReport rep;
    rep.k_inf = 1e300;
    for (int j = 0; j < map_f.grid.ny; ++j)
        for (int i = 0; i < map_f.grid.nx; ++i) {
            if (!mu_f.ok(i, j) || !mu_g.ok(i, j)) continue;
            cplx a = mu_f.at(i, j), b = mu_g.at(i, j);
            if (!(std::abs(a) < 1.0) || !(std::abs(b) < 1.0))
                fail("ellipticity-violation", "coefficient reaches the unit circle");
            double den = std::abs(1.0 - std::conj(a) * b);
            if (den < 1e-12) continue;
            double m = std::abs(a - b) / den; // quotient of moduli: exactly symmetric
            if (m > rep.k_sup) { rep.k_sup = m; rep.sup_location = {i, j}; }
            rep.k_inf = std::min(rep.k_inf, m);
            ++rep.nodes;
        }
    if (rep.nodes == 0) fail("no-valid-interior", "maps share no differentiable nodes");
    double log_K_sup = std::log((1.0 + rep.k_sup) / (1.0 - rep.k_sup));
    double log_K_inf = std::log((1.0 + rep.k_inf) / (1.0 - rep.k_inf));
    rep.d_teich = log_K_sup;
    rep.spread = log_K_sup - log_K_inf;
    return rep;
}

// Members of the entire family share the source grid of their normalized
// solutions; their parameters also pin the disk distance.
inline DistanceReport teich_distance(const EntireFamilyMember& a, const EntireFamilyMember& b) {
    DistanceReport rep = teich_distance(a.g, b.g);
    rep.d_hyperbolic = hyperbolic_distance(a.alpha, b.alpha);
    return rep;
}

struct IsometryReport {
    std::vector<cplx> alphas;
    std::vector<std::vector<double>> d_teich, d_hyperbolic; // pairwise, zero diagonal
    double max_discrepancy = 0.0; // max |d_teich - d_hyperbolic|
    double max_spread = 0.0;      // worst log K spread over any pair
};

// Constructs one member per parameter and compares the pairwise map distance
// matrix against the pairwise disk distance matrix.
inline IsometryReport isometry_audit(const Metric& m, const std::vector<cplx>& alphas,
                                     const GridSpec& grid, const BeltramiParams& prm = {}) {
    IsometryReport rep;
    rep.alphas = alphas;
    size_t n = alphas.size();
    std::vector<EntireFamilyMember> members;
    members.reserve(n);
    for (cplx a : alphas) members.push_back(construct_entire(a, m, grid, prm));
    rep.d_teich.assign(n, std::vector<double>(n, 0.0));
    rep.d_hyperbolic.assign(n, std::vector<double>(n, 0.0));
    for (size_t p = 0; p < n; ++p)
        for (size_t q = p + 1; q < n; ++q) {
            DistanceReport d = teich_distance(members[p], members[q]);
            rep.d_teich[p][q] = rep.d_teich[q][p] = d.d_teich;
            rep.d_hyperbolic[p][q] = rep.d_hyperbolic[q][p] = *d.d_hyperbolic;
            rep.max_discrepancy = std::max(rep.max_discrepancy,
                                           std::abs(d.d_teich - *d.d_hyperbolic));
            rep.max_spread = std::max(rep.max_spread, d.spread);
        }
    return rep;
}

} // namespace tensionlab

#endif
