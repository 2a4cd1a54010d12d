#ifndef TENSIONLAB_QC_ANALYSIS_HPP
#define TENSIONLAB_QC_ANALYSIS_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"
#include "metric.hpp"

// Per-map diagnostics: the Beltrami coefficient mu = f_zbar / f_z and its
// distortion, the Hopf field Phi = rho(f) f_z conj(f_zbar), the conformal
// factor sigma^2 = rho(f) |f_z|^2, and the three structural identities a
// harmonic map into a flat target satisfies:
//   log|mu| harmonic,  log sigma harmonic,  |mu| = |Phi| / |Psi|
// with Psi the holomorphic representative of sigma^2 (reconstructed through
// the harmonic conjugate of log sigma^2). Also the discrete maximum-principle
// scan of |mu| and the Euclidean-harmonic companion map h = psi + conj(phi).

namespace tensionlab {

// mu^f = f_zbar / f_z; nodes with |f_z| <= 1e-12 * max|f_z| are masked.
inline Field beltrami_coefficient(const Field& f) {
    Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f);
    double scale = max_abs(fz, true);
    Field out(f.grid);
    long kept = 0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!fz.ok(i, j) || std::abs(fz.at(i, j)) <= 1e-12 * scale) {
                out.mask(i, j);
                continue;
            }
            out.set(i, j, fzb.at(i, j) / fz.at(i, j));
            ++kept;
        }
    if (kept == 0) fail("all-degenerate", "f_z vanishes at every interior node");
    return out;
}

inline double distortion(cplx mu_value) {
    double k = std::abs(mu_value);
    if (k >= 1.0) fail("degenerate", "|mu| >= 1 has unbounded distortion");
    return (1.0 + k) / (1.0 - k);
}

// K = (1 + |mu|) / (1 - |mu|); orientation-reversing nodes are masked.
inline Field distortion_from_mu(const Field& mu) {
    Field out(mu.grid);
    for (int j = 0; j < mu.grid.ny; ++j)
        for (int i = 0; i < mu.grid.nx; ++i) {
            if (!mu.ok(i, j)) { out.mask(i, j); continue; }
            double k = std::abs(mu.at(i, j));
            if (k >= 1.0) { out.mask(i, j); continue; }
            out.set(i, j, (1.0 + k) / (1.0 - k));
        }
    return out;
}

inline Field hopf(const Field& f, const Metric& m) {
    Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f);
    Field out(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!fz.ok(i, j)) { out.mask(i, j); continue; }
            guard_potential(m, f.at(i, j));
            out.set(i, j, eval_rho(m, f.at(i, j)) * fz.at(i, j) * std::conj(fzb.at(i, j)));
        }
    return out;
}

inline double holomorphy_residual(const Field& phi) {
    Field d = wirtinger_zbar(phi);
    if (count_valid(d, true) == 0) fail("no-valid-interior", "field too masked to difference");
    return max_abs(d, true);
}

inline Field sigma2_field(const Field& f, const Metric& m) {
    Field fz = wirtinger_z(f);
    Field out(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!fz.ok(i, j)) { out.mask(i, j); continue; }
            guard_potential(m, f.at(i, j));
            out.set(i, j, eval_rho(m, f.at(i, j)) * std::norm(fz.at(i, j)));
        }
    return out;
}

// log sigma = (log rho(f)) / 2 + log|f_z|, real-valued; degenerate nodes mask.
inline Field log_sigma_field(const Field& f, const Metric& m) {
    Field fz = wirtinger_z(f);
    Field out(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            double a = fz.ok(i, j) ? std::abs(fz.at(i, j)) : 0.0;
            if (a == 0.0) { out.mask(i, j); continue; }
            guard_potential(m, f.at(i, j));
            out.set(i, j, 0.5 * eval_log_rho(m, f.at(i, j)) + std::log(a));
        }
    return out;
}

inline double log_sigma_residual(const Field& f, const Metric& m) {
    return harmonic_residual(log_sigma_field(f, m));
}

// log|mu| with the branch guard: nodes within 1e-8 of mu = 0 are masked.
// Returns nothing when no interior node survives (conformal map) - the
// harmonicity of log|mu| is then not applicable rather than failed.
inline std::optional<Field> log_abs_mu_field(const Field& f, double zero_tol = 1e-8) {
    Field mu = beltrami_coefficient(f);
    Field out(mu.grid);
    long kept = 0;
    for (int j = 0; j < mu.grid.ny; ++j)
        for (int i = 0; i < mu.grid.nx; ++i) {
            double a = mu.ok(i, j) ? std::abs(mu.at(i, j)) : 0.0;
            if (a < zero_tol) { out.mask(i, j); continue; }
            out.set(i, j, std::log(a));
            if (mu.grid.interior(i, j)) ++kept;
        }
    if (kept == 0) return std::nullopt;
    return out;
}

inline std::optional<double> log_abs_mu_residual(const Field& f) {
    std::optional<Field> lm = log_abs_mu_field(f);
    if (!lm) return std::nullopt;
    return harmonic_residual(*lm);
}

// ---------------------------------------------------------------------------
// Psi: the holomorphic representative of sigma^2, as exp(log sigma^2 +
// i harmonic_conjugate(log sigma^2)) with phase zero at the basepoint, so
// Psi(base) = sigma^2(base). The conjugate is integrated once for the phase
// and once more for the modulus: conjugating twice returns -log sigma^2, but
// only through the two path integrals, so the rebuilt modulus differs from
// the stored field by exactly the accumulated path dependence (the area
// integral of the discrete Laplacian) -- the quantity the ratio identity is
// about. Exponentiating the stored values directly would make |Psi| = sigma^2
// bit-for-bit and the audit below vacuous on any input whatsoever.
inline Field reconstruct_psi(const Field& f, const Metric& m, int bi, int bj) {
    Field ls2(f.grid);
    {
        Field ls = log_sigma_field(f, m);
        for (int j = 0; j < f.grid.ny; ++j)
            for (int i = 0; i < f.grid.nx; ++i) {
                if (!ls.ok(i, j)) { ls2.mask(i, j); continue; }
                ls2.set(i, j, 2.0 * ls.at(i, j).real());
            }
    }
    if (!ls2.ok(bi, bj)) fail("out-of-domain", "basepoint outside the valid region");
    // inverted maps arrive with a few 1e-2 of relative discrete-harmonic
    // defect; the genuinely non-harmonic controls sit near 10. The guard
    // separates those, not honest numerics from exact fields.
    const double lax = 0.25;
    Field v = harmonic_conjugate(ls2, bi, bj, lax);
    // second conjugation, mechanical this time (the guard above already ran,
    // and v's scale is the variation of ls2, not its magnitude): recovers
    // -(log sigma^2) up to the path-dependence the residual is after
    Field w;
    {
        Field gx(f.grid), gy(f.grid);
        Field vz = wirtinger_z(v);
        for (int j = 0; j < f.grid.ny; ++j)
            for (int i = 0; i < f.grid.nx; ++i) {
                if (!vz.ok(i, j)) { gx.mask(i, j); gy.mask(i, j); continue; }
                gx.set(i, j, 2.0 * vz.at(i, j).imag());  // -v_y
                gy.set(i, j, 2.0 * vz.at(i, j).real());  // v_x
            }
        w = detail::path_integrate(gx, gy, bi, bj, f.grid.h, f.grid.h);
    }
    const double u0 = ls2.at(bi, bj).real();
    Field psi(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!v.ok(i, j) || !w.ok(i, j)) { psi.mask(i, j); continue; }
            psi.set(i, j, std::exp(cplx(u0 - w.at(i, j).real(), v.at(i, j).real())));
        }
    return psi;
}

inline Field reconstruct_psi(const Field& f, const Metric& m) {
    detail::Rect r = detail::valid_rect(f);
    return reconstruct_psi(f, m, (r.i0 + r.i1) / 2, (r.j0 + r.j1) / 2);
}

// max interior | |mu| - |Phi| / |Psi| |: the ratio identity through the
// reconstructed Psi, O(h^2) on harmonic fixtures.
inline double mu_vs_hopf_ratio_residual(const Field& f, const Metric& m) {
    Field mu = beltrami_coefficient(f);
    Field phi = hopf(f, m);
    Field psi = reconstruct_psi(f, m);
    double worst = 0.0;
    long n = 0;
    for (int j = 1; j <= f.grid.ny - 2; ++j)
        for (int i = 1; i <= f.grid.nx - 2; ++i) {
            if (!mu.ok(i, j) || !phi.ok(i, j) || !psi.ok(i, j)) continue;
            double p = std::abs(psi.at(i, j));
            if (p == 0.0) continue;
            worst = std::max(worst,
                             std::abs(std::abs(mu.at(i, j)) - std::abs(phi.at(i, j)) / p));
            ++n;
        }
    if (n == 0) fail("no-valid-interior", "no nodes where mu, Phi and Psi all exist");
    return worst;
}

// ---------------------------------------------------------------------------
// arg of a complex field with row-major 2 pi unwrapping (each node is pulled
// within pi of its left, or failing that lower, unwrapped neighbour).
inline Field unwrapped_arg(const Field& src) {
    Field out(src.grid);
    const double two_pi = 2.0 * M_PI;
    for (int j = 0; j < src.grid.ny; ++j)
        for (int i = 0; i < src.grid.nx; ++i) {
            if (!src.ok(i, j) || src.at(i, j) == cplx(0.0)) { out.mask(i, j); continue; }
            double a = std::arg(src.at(i, j));
            double ref = a;
            if (i > 0 && out.ok(i - 1, j)) ref = out.at(i - 1, j).real();
            else if (j > 0 && out.ok(i, j - 1)) ref = out.at(i, j - 1).real();
            a += two_pi * std::round((ref - a) / two_pi);
            out.set(i, j, a);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Discrete maximum-principle scan of |mu|: interior nodes that beat all eight
// neighbours by more than tau = 10 h^2 curvature_scale are reported. Interior
// minima of |mu| away from zeros violate the minimum principle for maps with
// log|mu| harmonic, so they are scanned too (skipping |mu| <= 1e-6, where a
// genuine zero of mu may sit).
struct MaxPrincipleReport {
    std::vector<std::pair<int, int>> maxima, minima;
    double tau = 0.0;
};

inline MaxPrincipleReport max_principle_scan(const Field& mu, double curvature_scale = 1e-3) {
    MaxPrincipleReport rep;
    double h = mu.grid.h;
    rep.tau = 10.0 * h * h * curvature_scale;
    for (int j = 1; j <= mu.grid.ny - 2; ++j)
        for (int i = 1; i <= mu.grid.nx - 2; ++i) {
            if (!mu.ok(i, j)) continue;
            bool nbrs_ok = true;
            double lo = 1e300, hi = -1e300;
            for (int dj = -1; dj <= 1 && nbrs_ok; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    if (!mu.ok(i + di, j + dj)) { nbrs_ok = false; break; }
                    double a = std::abs(mu.at(i + di, j + dj));
                    lo = std::min(lo, a); hi = std::max(hi, a);
                }
            if (!nbrs_ok) continue;
            double v = std::abs(mu.at(i, j));
            if (v > hi + rep.tau) rep.maxima.emplace_back(i, j);
            if (v > 1e-6 && v < lo - rep.tau) rep.minima.emplace_back(i, j);
        }
    return rep;
}

// ---------------------------------------------------------------------------
// Companion map h = psi + conj(phi), with psi and phi the grid
// antiderivatives of Psi and Phi from the basepoint. Then h_z = Psi and
// h_zbar = conj(Phi), so |mu_h| = |Phi| / |Psi| = |mu_f| on harmonic input,
// while h itself is Euclidean-harmonic. The h_z = Psi orientation is the one
// that keeps |mu_h| < 1.
inline Field companion_map(const Field& f, const Metric& m, int bi, int bj) {
    Field psi_int = reconstruct_psi(f, m, bi, bj);
    Field phi_int = hopf(f, m);
    Field psi = complex_antiderivative(psi_int, bi, bj);
    Field phi = complex_antiderivative(phi_int, bi, bj);
    Field h(f.grid);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!psi.ok(i, j) || !phi.ok(i, j)) { h.mask(i, j); continue; }
            h.set(i, j, psi.at(i, j) + std::conj(phi.at(i, j)));
        }
    return h;
}

inline Field companion_map(const Field& f, const Metric& m) {
    detail::Rect r = detail::valid_rect(f);
    return companion_map(f, m, (r.i0 + r.i1) / 2, (r.j0 + r.j1) / 2);
}

// sup | K(., h) - K(., f) | over the nodes where both distortions exist.
inline double companion_distortion_match(const Field& f, const Metric& m) {
    Field kh = distortion_from_mu(beltrami_coefficient(companion_map(f, m)));
    Field kf = distortion_from_mu(beltrami_coefficient(f));
    double worst = 0.0;
    long n = 0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!kh.ok(i, j) || !kf.ok(i, j)) continue;
            worst = std::max(worst, std::abs(kh.at(i, j).real() - kf.at(i, j).real()));
            ++n;
        }
    if (n == 0) fail("no-valid-interior", "companion and map share no differentiable nodes");
    return worst;
}

} // namespace tensionlab

#endif
