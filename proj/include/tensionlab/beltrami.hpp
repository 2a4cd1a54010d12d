#ifndef TENSIONLAB_BELTRAMI_HPP
#define TENSIONLAB_BELTRAMI_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"
#include "metric.hpp"
#include "qc_analysis.hpp"

// Solving g_wbar = mu g_w in least squares with point normalizations, grid
// map inversion, the pushforward of a map's Beltrami coefficient to its
// image, the first-order transport system an inverse coefficient satisfies,
// and the construction of the entire family alpha e^{-iv}.
//
// Sign conventions: the transport residual and the nu twist both carry a
// sign parameter s = +1 / -1,
//   R_s[mu] = mu_w - conj(mu) mu_wbar - s mu (lambda + conj(mu) conj(lambda)),
//   nu_s    = e^{s i v} conj(mu).
// The two appear in the literature with either sign; s = +1 is the default
// here, while the family construction uses the coefficient class
// alpha e^{-iv}, whose solutions invert to maps with vanishing tension.
// Audits evaluate both signs and judge the smaller, so nothing downstream
// hinges on the choice.

namespace tensionlab {

struct PointConstraint {
    cplx point;
    cplx value;
};

struct BeltramiParams {
    double residual_factor = 1e-6; // stop once max|g_wbar - mu g_w| <= factor * max|g_w|
    long budget_factor = 10;       // CG iteration budget, times the unknown count
    int check_every = 32;
    double stabilization = 0.1; // weight of the second-difference penalty (see below)
};

namespace detail {

struct ConstraintRow {
    int idx[4];
    double w[4];
};

inline ConstraintRow constraint_row(const GridSpec& g, cplx p) {
    if (!g.contains(p)) fail("constraint-outside-grid", "normalization point not in the grid");
    double sx = (p.real() - g.x0) / g.h, sy = (p.imag() - g.y0) / g.h;
    int i = std::clamp((int)std::floor(sx), 0, g.nx - 2);
    int j = std::clamp((int)std::floor(sy), 0, g.ny - 2);
    double tx = sx - i, ty = sy - j;
    ConstraintRow r;
    r.idx[0] = g.idx(i, j);         r.w[0] = (1 - tx) * (1 - ty);
    r.idx[1] = g.idx(i + 1, j);     r.w[1] = tx * (1 - ty);
    r.idx[2] = g.idx(i, j + 1);     r.w[2] = (1 - tx) * ty;
    r.idx[3] = g.idx(i + 1, j + 1); r.w[3] = tx * ty;
    return r;
}

} // namespace detail

// Least-squares solution of g_wbar = mu g_w over the grid, with exactly two
// interpolated point constraints. The constraints are imposed at the end by
// an affine change g -> beta g + gamma, which preserves the equation exactly;
// pinning grid values during the iteration instead digs point dimples into
// the solution (interpolation pins act like discrete point sources) whose
// halos dominate every second-derivative diagnostic taken downstream.
//
// The residual is collocated at cell centers and the functional carries a
// small second-difference penalty. Both address the same trap: the solution
// set of the first-order system is enormous (post-composing any solution
// with a holomorphic map gives another, and compact stencils additionally
// annihilate Nyquist-modulated fields), so an unstabilized least-squares
// solver happily returns a representative full of grid-scale noise that the
// functional cannot see but that wrecks every derivative and the cell-wise
// inversion taken of it downstream. The penalty eps * (second difference)
// vanishes at O(h^2) on smooth fields -- the same order as the collocation
// truncation, so it does not bias the solution above truncation level --
// while grid-scale oscillation pays an O(1) price per node, so the blend
// zeroes it out. Consequence: for non-constant mu the returned residual
// may sit at the honest O(h^2) truncation floor of the stencil -- the exact
// continuum solution itself does no better -- and the stopping test accepts
// the floor once conjugate gradients stops making progress. An optional
// seed picks the neighborhood (and hence the representative) to converge
// in; the family construction below uses this to land on the entire member.
inline Field solve_beltrami_ls(const Field& mu, const std::vector<PointConstraint>& cons,
                               const BeltramiParams& prm = {}, const Field* seed = nullptr) {
    const GridSpec& g = mu.grid;
    if (cons.size() != 2) fail("bad-parameter", "need exactly two normalization points");
    if (std::abs(cons[0].point - cons[1].point) == 0.0)
        fail("bad-parameter", "normalization points coincide");
    double k = max_abs(mu);
    if (k >= 1.0 - 1e-6)
        fail("ellipticity-violation", "max |mu| = " + std::to_string(k) + " too close to 1");

    const int N = g.count();
    const double h = g.h;

    // equation list: cells whose four corners carry the coefficient; the
    // coefficient at the cell center is the corner average
    std::vector<int> eq_cell; // index of the (i,j) corner node
    std::vector<cplx> c00, c10, c01, c11;
    eq_cell.reserve((g.nx - 1) * (size_t)(g.ny - 1));
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            if (!(mu.ok(i, j) && mu.ok(i + 1, j) && mu.ok(i, j + 1) && mu.ok(i + 1, j + 1)))
                continue;
            eq_cell.push_back(g.idx(i, j));
            cplx muc = 0.25 * (mu.at(i, j) + mu.at(i + 1, j) + mu.at(i, j + 1) +
                               mu.at(i + 1, j + 1));
            // residual = sum over corners of u_c [(sx + i sy) - mu (sx - i sy)] / (4h)
            c00.push_back((cplx(-1, -1) - muc * cplx(-1, 1)) / (4.0 * h));
            c10.push_back((cplx(1, -1) - muc * cplx(1, 1)) / (4.0 * h));
            c01.push_back((cplx(-1, 1) - muc * cplx(-1, -1)) / (4.0 * h));
            c11.push_back((cplx(1, 1) - muc * cplx(1, -1)) / (4.0 * h));
        }
    if (eq_cell.empty()) fail("no-valid-interior", "no cell carries the coefficient");
    const int nx = g.nx, ny = g.ny;
    const size_t E = eq_cell.size();
    const size_t PX = (size_t)(nx - 2) * ny, PY = (size_t)nx * (ny - 2);
    const double pen = prm.stabilization;

    // rows [0,E): Beltrami residual at cell centers; the rest: penalties
    auto apply_A = [&](const std::vector<cplx>& u, std::vector<cplx>& r, double* max_gw) {
        double gw = 0.0;
        for (size_t e = 0; e < E; ++e) {
            int id = eq_cell[e];
            cplx u00 = u[id], u10 = u[id + 1], u01 = u[id + nx], u11 = u[id + nx + 1];
            r[e] = c00[e] * u00 + c10[e] * u10 + c01[e] * u01 + c11[e] * u11;
            if (max_gw) {
                // g_w at the cell center, for the stopping scale
                cplx dgw = ((u10 + u11 - u00 - u01) - cplx(0, 1) * (u01 + u11 - u00 - u10)) /
                           (4.0 * h);
                gw = std::max(gw, std::abs(dgw));
            }
        }
        size_t o = E;
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i <= nx - 2; ++i, ++o) {
                int id = j * nx + i;
                r[o] = pen * (u[id + 1] - 2.0 * u[id] + u[id - 1]);
            }
        for (int j = 1; j <= ny - 2; ++j)
            for (int i = 0; i < nx; ++i, ++o) {
                int id = j * nx + i;
                r[o] = pen * (u[id + nx] - 2.0 * u[id] + u[id - nx]);
            }
        if (max_gw) *max_gw = gw;
    };
    auto apply_AH = [&](const std::vector<cplx>& r, std::vector<cplx>& y) {
        std::fill(y.begin(), y.end(), cplx(0.0));
        for (size_t e = 0; e < E; ++e) {
            int id = eq_cell[e];
            y[id] += std::conj(c00[e]) * r[e];
            y[id + 1] += std::conj(c10[e]) * r[e];
            y[id + nx] += std::conj(c01[e]) * r[e];
            y[id + nx + 1] += std::conj(c11[e]) * r[e];
        }
        size_t o = E;
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i <= nx - 2; ++i, ++o) {
                int id = j * nx + i;
                cplx s = pen * r[o];
                y[id + 1] += s;
                y[id] -= 2.0 * s;
                y[id - 1] += s;
            }
        for (int j = 1; j <= ny - 2; ++j)
            for (int i = 0; i < nx; ++i, ++o) {
                int id = j * nx + i;
                cplx s = pen * r[o];
                y[id + nx] += s;
                y[id] -= 2.0 * s;
                y[id - nx] += s;
            }
    };

    detail::ConstraintRow row0 = detail::constraint_row(g, cons[0].point);
    detail::ConstraintRow row1 = detail::constraint_row(g, cons[1].point);
    auto normalize = [&](std::vector<cplx>& u) {
        cplx s0 = 0, s1 = 0;
        for (int a = 0; a < 4; ++a) {
            s0 += row0.w[a] * u[row0.idx[a]];
            s1 += row1.w[a] * u[row1.idx[a]];
        }
        if (std::abs(s1 - s0) == 0.0) fail("degenerate", "normalization collapsed");
        cplx beta = (cons[1].value - cons[0].value) / (s1 - s0);
        cplx gamma = cons[0].value - beta * s0;
        for (auto& z : u) z = beta * z + gamma;
    };

    // starting point: the caller's seed, or the affine map through the
    // constraints (the final normalization fixes the constraint values)
    std::vector<cplx> u0(N);
    if (seed) {
        if (!seed->grid.same_as(g) || (int)seed->v.size() != N)
            fail("grid-mismatch", "seed field does not match the coefficient grid");
        u0 = seed->v;
    } else {
        cplx p0 = cons[0].point, dv = cons[1].value - cons[0].value,
             dp = cons[1].point - cons[0].point;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                u0[g.idx(i, j)] = cons[0].value + dv * (g.node(i, j) - p0) / dp;
    }

    std::vector<cplx> req(E + PX + PY), tmp(N), b(N);
    apply_A(u0, req, nullptr);
    apply_AH(req, b);
    for (auto& z : b) z = -z;

    auto apply_M = [&](const std::vector<cplx>& v, std::vector<cplx>& out) {
        apply_A(v, req, nullptr);
        apply_AH(req, out);
    };
    auto dot_re = [](const std::vector<cplx>& a, const std::vector<cplx>& c) {
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i)
            s += a[i].real() * c[i].real() + a[i].imag() * c[i].imag();
        return s;
    };

    std::vector<cplx> v(N, 0.0), r = b, p = b, q(N), u(N);
    double rs = dot_re(r, r);
    long budget = prm.budget_factor * (long)N;
    double scale0 = std::sqrt(rs) + 1e-300;
    double best_rs = rs;
    int stalled = 0;
    for (long it = 0; it < budget; ++it) {
        if (it % prm.check_every == 0 || rs <= 1e-28 * scale0 * scale0) {
            u = u0;
            for (int i2 = 0; i2 < N; ++i2) u[i2] += v[i2];
            double max_gw = 0.0;
            apply_A(u, req, &max_gw);
            double rmax = 0.0;
            for (size_t e = 0; e < E; ++e) rmax = std::max(rmax, std::abs(req[e]));
            bool hit_target = rmax <= 0.5 * prm.residual_factor * std::max(max_gw, 1e-300);
            // floor detection: the normal equations solved out, or no useful
            // progress on them over a long run of checks
            if (rs < best_rs * 0.995) { best_rs = rs; stalled = 0; }
            else ++stalled;
            bool at_floor = stalled >= 25 || rs <= 1e-22 * scale0 * scale0;
            if (hit_target || at_floor) {
                normalize(u);
                Field out(g);
                out.v = u;
                return out;
            }
        }
        apply_M(p, q);
        double pq = dot_re(p, q);
        if (pq <= 0.0) break;
        double alpha = rs / pq;
        for (int i2 = 0; i2 < N; ++i2) { v[i2] += alpha * p[i2]; r[i2] -= alpha * q[i2]; }
        double rs2 = dot_re(r, r);
        double beta = rs2 / rs;
        rs = rs2;
        for (int i2 = 0; i2 < N; ++i2) p[i2] = r[i2] + beta * p[i2];
    }
    fail("cg-stagnation", "least-squares iteration exhausted its budget");
}

// ---------------------------------------------------------------------------
// Grid inversion: for each target node w find z with f(z) = w by bilinear
// Newton inside candidate source cells (seeded by image bounding boxes).

struct InvertReport {
    long covered = 0, uncovered = 0, diverged = 0, hit = 0;
};

inline Field invert_map(const Field& f, const GridSpec& target, InvertReport* report = nullptr) {
    const GridSpec& g = f.grid;
    Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f);
    long bad = 0, tot = 0;
    for (int j = 1; j <= g.ny - 2; ++j)
        for (int i = 1; i <= g.nx - 2; ++i) {
            if (!fz.ok(i, j)) continue;
            ++tot;
            if (std::norm(fz.at(i, j)) - std::norm(fzb.at(i, j)) <= 0.0) ++bad;
        }
    if (tot == 0 || bad == tot) fail("all-degenerate", "no orientation-preserving interior nodes");
    if (bad > tot / 20)
        fail("degenerate-jacobian", std::to_string(bad) + " of " + std::to_string(tot) +
                                        " interior nodes have |f_z| <= |f_zbar|");

    double img_lo_x = 1e300, img_hi_x = -1e300, img_lo_y = 1e300, img_hi_y = -1e300;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (f.ok(i, j)) {
                img_lo_x = std::min(img_lo_x, f.at(i, j).real());
                img_hi_x = std::max(img_hi_x, f.at(i, j).real());
                img_lo_y = std::min(img_lo_y, f.at(i, j).imag());
                img_hi_y = std::max(img_hi_y, f.at(i, j).imag());
            }
    double img_diam = std::hypot(img_hi_x - img_lo_x, img_hi_y - img_lo_y) + 1e-300;
    double tol_hard = 1e-12 * img_diam, tol_soft = 1e-9 * img_diam;

    // bucket candidate source cells per target node
    std::vector<std::vector<int>> bucket(target.count());
    double pad = 1e-9 * img_diam;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            if (!f.ok(i, j) || !f.ok(i + 1, j) || !f.ok(i, j + 1) || !f.ok(i + 1, j + 1))
                continue;
            cplx c00 = f.at(i, j), c10 = f.at(i + 1, j), c01 = f.at(i, j + 1),
                 c11 = f.at(i + 1, j + 1);
            double lx = std::min({c00.real(), c10.real(), c01.real(), c11.real()}) - pad;
            double hx = std::max({c00.real(), c10.real(), c01.real(), c11.real()}) + pad;
            double ly = std::min({c00.imag(), c10.imag(), c01.imag(), c11.imag()}) - pad;
            double hy = std::max({c00.imag(), c10.imag(), c01.imag(), c11.imag()}) + pad;
            int it0 = std::max(0, (int)std::ceil((lx - target.x0) / target.h - 1e-9));
            int it1 = std::min(target.nx - 1, (int)std::floor((hx - target.x0) / target.h + 1e-9));
            int jt0 = std::max(0, (int)std::ceil((ly - target.y0) / target.h - 1e-9));
            int jt1 = std::min(target.ny - 1, (int)std::floor((hy - target.y0) / target.h + 1e-9));
            for (int jt = jt0; jt <= jt1; ++jt)
                for (int it = it0; it <= it1; ++it)
                    bucket[target.idx(it, jt)].push_back(g.idx(i, j));
        }

    Field out(target);
    InvertReport rep;
    for (int jt = 0; jt < target.ny; ++jt)
        for (int it = 0; it < target.nx; ++it) {
            const auto& cand = bucket[target.idx(it, jt)];
            if (cand.empty()) { out.mask(it, jt); ++rep.uncovered; continue; }
            ++rep.hit;
            cplx w = target.node(it, jt);
            bool found = false, any_diverged = false;
            for (int cid : cand) {
                int i = cid % g.nx, j = cid / g.nx;
                cplx c00 = f.at(i, j), c10 = f.at(i + 1, j), c01 = f.at(i, j + 1),
                     c11 = f.at(i + 1, j + 1);
                cplx ax = c10 - c00, ay = c01 - c00, axy = c11 - c10 - c01 + c00;
                double xi = 0.5, eta = 0.5;
                bool inside = true, converged = false;
                cplx B;
                for (int itn = 0; itn < 30; ++itn) {
                    B = c00 + ax * xi + ay * eta + axy * (xi * eta);
                    cplx res = w - B;
                    if (std::abs(res) <= tol_hard) { converged = true; break; }
                    cplx Bx = ax + axy * eta, By = ay + axy * xi;
                    double a11 = Bx.real(), a12 = By.real(), a21 = Bx.imag(), a22 = By.imag();
                    double dj = a11 * a22 - a12 * a21;
                    if (std::abs(dj) < 1e-300) break;
                    xi += (res.real() * a22 - res.imag() * a12) / dj;
                    eta += (res.imag() * a11 - res.real() * a21) / dj;
                    if (xi < -0.5 || xi > 1.5 || eta < -0.5 || eta > 1.5) { inside = false; break; }
                }
                if (!converged && inside) {
                    B = c00 + ax * xi + ay * eta + axy * (xi * eta);
                    if (std::abs(w - B) <= tol_soft) converged = true;
                    else any_diverged = true;
                }
                if (converged && xi >= -0.02 && xi <= 1.02 && eta >= -0.02 && eta <= 1.02) {
                    // cubic polish: the bilinear surrogate is only O(h^2),
                    // and its cell-edge kinks would leak into every
                    // derivative taken of the inverse downstream
                    cplx s = g.node(i, j) + cplx(xi * g.h, eta * g.h), s0 = s;
                    for (int pn = 0; pn < 8; ++pn) {
                        cplx C, Cx, Cy;
                        if (!bicubic_eval(f, s, C, Cx, Cy)) { s = s0; break; }
                        cplx res = w - C;
                        if (std::abs(res) <= 1e-14 * img_diam) break;
                        double a11 = Cx.real(), a12 = Cy.real(), a21 = Cx.imag(),
                               a22 = Cy.imag();
                        double dj = a11 * a22 - a12 * a21;
                        if (std::abs(dj) < 1e-300) { s = s0; break; }
                        s += cplx((res.real() * a22 - res.imag() * a12) / dj,
                                  (res.imag() * a11 - res.real() * a21) / dj);
                        if (std::abs(s - s0) > 1.5 * g.h) { s = s0; break; }
                    }
                    out.set(it, jt, s);
                    found = true;
                    break;
                }
            }
            if (found) ++rep.covered;
            else {
                out.mask(it, jt);
                ++rep.uncovered;
                if (any_diverged) ++rep.diverged;
            }
        }
    if (rep.diverged * 10 > rep.hit)
        fail("not-injective-seed", "Newton diverged on " + std::to_string(rep.diverged) +
                                       " of " + std::to_string(rep.hit) + " seeded targets");
    if (report) *report = rep;
    return out;
}

// Coefficient of the inverse map, sampled on a target grid:
//   mu_{f^{-1}}(w) = -f_zbar / conj(f_z) evaluated at z = f^{-1}(w).
inline Field pushforward_mu(const Field& f, const GridSpec& target,
                            InvertReport* report = nullptr) {
    Field z = invert_map(f, target, report);
    Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f);
    Field out(target);
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            if (!z.ok(i, j)) { out.mask(i, j); continue; }
            cplx p = z.at(i, j);
            if (!bilinear_cell_valid(fz, p)) { out.mask(i, j); continue; }
            cplx a = bilinear_sample(fz, p), b = bilinear_sample(fzb, p);
            if (a == cplx(0.0)) { out.mask(i, j); continue; }
            out.set(i, j, -b / std::conj(a));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Transport residual of an inverse-side coefficient. The expanded grouping
// below is deliberate: with it, coefficients of the form alpha e^{s i v}
// cancel to the last bit against their own class sign.

namespace detail {

inline cplx transport_expr(cplx muv, cplx muw, cplx muwb, cplx lam, int s) {
    return (muw - double(s) * (muv * lam)) -
           (std::conj(muv) * muwb + double(s) * (std::conj(muv) * (muv * std::conj(lam))));
}

} // namespace detail

inline Field inverse_beltrami_residual(const Field& mu, const Metric& m, int sign = +1) {
    Field muw = wirtinger_z(mu), muwb = wirtinger_zbar(mu);
    Field out(mu.grid);
    for (int j = 0; j < mu.grid.ny; ++j)
        for (int i = 0; i < mu.grid.nx; ++i) {
            if (!muw.ok(i, j) || !mu.ok(i, j)) { out.mask(i, j); continue; }
            cplx lam = eval_lambda(m, mu.grid.node(i, j));
            out.set(i, j, detail::transport_expr(mu.at(i, j), muw.at(i, j), muwb.at(i, j),
                                                 lam, sign));
        }
    return out;
}

template <class Coef>
Field inverse_beltrami_residual_analytic(const Coef& c, const Metric& m, const GridSpec& g,
                                         int sign = +1) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cplx w = g.node(i, j);
            out.set(i, j, detail::transport_expr(c.mu(w), c.mu_w(w), c.mu_wbar(w),
                                                 eval_lambda(m, w), sign));
        }
    return out;
}

// nu_s = e^{s i v} conj(mu); constant exactly when mu lies in the matching
// phase class.
inline Field nu_twist(const Field& mu, const Metric& m, int sign = +1) {
    Field out(mu.grid);
    for (int j = 0; j < mu.grid.ny; ++j)
        for (int i = 0; i < mu.grid.nx; ++i) {
            if (!mu.ok(i, j)) { out.mask(i, j); continue; }
            double vv = eval_v(m, mu.grid.node(i, j));
            out.set(i, j, std::exp(cplx(0, double(sign) * vv)) * std::conj(mu.at(i, j)));
        }
    return out;
}

template <class Coef>
Field nu_twist_analytic(const Coef& c, const Metric& m, const GridSpec& g, int sign = +1) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cplx w = g.node(i, j);
            out.set(i, j, std::exp(cplx(0, double(sign) * eval_v(m, w))) * std::conj(c.mu(w)));
        }
    return out;
}

// Q = max interior |nu_wbar - mu nu_w|: the twist solves the same linear
// Beltrami equation as the map itself when mu sits in the matching class.
inline double nu_quasiregular_residual(const Field& mu, const Metric& m, int sign = +1) {
    Field nu = nu_twist(mu, m, sign);
    Field nw = wirtinger_z(nu), nwb = wirtinger_zbar(nu);
    double q = 0.0;
    long n = 0;
    for (int j = 0; j < mu.grid.ny; ++j)
        for (int i = 0; i < mu.grid.nx; ++i) {
            if (!nw.ok(i, j) || !mu.ok(i, j)) continue;
            q = std::max(q, std::abs(nwb.at(i, j) - mu.at(i, j) * nw.at(i, j)));
            ++n;
        }
    if (n == 0) fail("no-valid-interior", "no interior derivative nodes");
    return q;
}

inline double constancy_deviation(const Field& nu) {
    cplx mean = 0.0;
    long n = 0;
    for (int j = 0; j < nu.grid.ny; ++j)
        for (int i = 0; i < nu.grid.nx; ++i)
            if (nu.ok(i, j)) { mean += nu.at(i, j); ++n; }
    if (n == 0) fail("no-valid-interior", "empty field");
    mean /= double(n);
    double dev = 0.0;
    for (int j = 0; j < nu.grid.ny; ++j)
        for (int i = 0; i < nu.grid.nx; ++i)
            if (nu.ok(i, j)) dev = std::max(dev, std::abs(nu.at(i, j) - mean));
    return dev;
}

// ---------------------------------------------------------------------------
// The entire family: for |alpha| < 1 and a flat metric, the coefficient
// mu_g = alpha e^{-i v(w)} is solved for g (normalized g(0) = 0, g(1) = 1)
// and inverted; the inverse f is the family member, a harmonic map with
// |mu_f| = |alpha|. Metrics with constant v (euclid in particular) short-cut
// through the closed linear form, which also has an exact inverse.

struct EntireFamilyMember {
    cplx alpha;
    Metric metric;
    GridSpec grid;
    Field mu; // alpha e^{-iv} on the grid
    Field g;  // normalized solution, a map on the same grid
    Field f;  // its inverse on the same grid (masked off the image)
};

inline EntireFamilyMember construct_entire(cplx alpha, const Metric& m, const GridSpec& g,
                                           const BeltramiParams& prm = {}) {
    if (!(std::abs(alpha) < 1.0)) fail("alpha-out-of-disk", "need |alpha| < 1");
    if (!m.flat) fail("not-flat", "the family needs a global conjugate v");
    if (!g.contains(cplx(0.0)) || !g.contains(cplx(1.0)))
        fail("constraint-outside-grid", "grid must contain the normalization points 0 and 1");

    Field mu(g);
    bool const_v = true;
    double v00 = eval_v(m, g.node(0, 0));
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double vv = eval_v(m, g.node(i, j));
            if (vv != v00) const_v = false;
            mu.set(i, j, alpha * std::exp(cplx(0, -vv)));
        }

    EntireFamilyMember mem{alpha, m, g, std::move(mu), Field(g), Field(g)};
    if (const_v) {
        cplx muhat = alpha * std::exp(cplx(0, -v00));
        cplx A = 1.0 / (1.0 + muhat), B = muhat / (1.0 + muhat);
        double D = std::norm(A) - std::norm(B);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                cplx w = g.node(i, j);
                mem.g.set(i, j, A * w + B * std::conj(w));
                mem.f.set(i, j, (std::conj(A) * w - B * std::conj(w)) / D);
            }
        return mem;
    }

    // Seed with Phi(w) + alpha conj(Phi(w)), Phi' = e^{H/2}: a continuum
    // solution of the coefficient equation (its mu is exactly alpha e^{-iv}),
    // normalized through 0 and 1 by an affine post-composition, which stays in
    // the class. The least-squares pass then settles it onto the discrete
    // operator instead of wandering across the solution family.
    Field seedf(g);
    {
        static const double gx[4] = {-0.8611363115940526, -0.3399810435848563,
                                     0.3399810435848563, 0.8611363115940526};
        static const double gwt[4] = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};
        auto seg = [&](cplx a, cplx b) {
            cplx mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
            for (int k = 0; k < 4; ++k)
                s += gwt[k] * std::exp(0.5 * eval_H(m, mid + gx[k] * half));
            return s * half;
        };
        auto line = [&](cplx a, cplx b) {
            int n = std::max(1, (int)std::ceil(std::abs(b - a) / g.h));
            cplx s = 0.0;
            for (int k = 0; k < n; ++k)
                s += seg(a + (double(k) / n) * (b - a), a + (double(k + 1) / n) * (b - a));
            return s;
        };
        std::vector<cplx> phi((size_t)g.nx * g.ny);
        phi[0] = 0.0;
        for (int i = 1; i < g.nx; ++i)
            phi[g.idx(i, 0)] = phi[g.idx(i - 1, 0)] + seg(g.node(i - 1, 0), g.node(i, 0));
        for (int j = 1; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                phi[g.idx(i, j)] = phi[g.idx(i, j - 1)] + seg(g.node(i, j - 1), g.node(i, j));
        cplx anchor = g.node(0, 0);
        cplx phi0 = line(anchor, cplx(0.0)), phi1 = line(anchor, cplx(1.0));
        cplx s0 = phi0 + alpha * std::conj(phi0), s1 = phi1 + alpha * std::conj(phi1);
        if (std::abs(s1 - s0) == 0.0) fail("degenerate", "seed chart collapsed");
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                cplx ph = phi[g.idx(i, j)];
                seedf.set(i, j, (ph + alpha * std::conj(ph) - s0) / (s1 - s0));
            }
    }

    Field graw = solve_beltrami_ls(mem.mu, {{cplx(0.0), cplx(0.0)}, {cplx(1.0), cplx(1.0)}},
                                   prm, &seedf);
    cplx c0 = bilinear_sample(graw, cplx(0.0)), c1 = bilinear_sample(graw, cplx(1.0));
    if (std::abs(c1 - c0) == 0.0) fail("degenerate", "normalization collapsed");
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            mem.g.set(i, j, (graw.at(i, j) - c0) / (c1 - c0));
    mem.f = invert_map(mem.g, g);
    return mem;
}

} // namespace tensionlab

#endif
