#ifndef TENSIONLAB_TENSION_HPP
#define TENSIONLAB_TENSION_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"
#include "metric.hpp"

// The tension residual T[f] = f_{z zbar} + lambda(f) f_z f_zbar and a
// Dirichlet solver for T[f] = 0. The default solver is damped Newton with
// SOR inner sweeps on the complex-linearized operator (the linearization is
// complex-linear because lambda is holomorphic); the literal damped lagged
// Gauss-Seidel iteration ships as method "relax" for reference and for
// non-flat metrics without a usable linearization.

namespace tensionlab {

struct SolveParams {
    double tol = 1e-10;
    long max_iters = 100000;
    double theta = 0.8;
    int report_every = 100;
    std::string method = "newton"; // or "relax"
};

struct SolveReport {
    long iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;
};

inline Field tension_residual(const Field& f, const Metric& m) {
    Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f), fzzb = mixed_zzbar(f);
    Field out(f.grid);
    out.mask_boundary();
    for (int j = 1; j <= f.grid.ny - 2; ++j)
        for (int i = 1; i <= f.grid.nx - 2; ++i) {
            if (!fzzb.ok(i, j)) { out.mask(i, j); continue; }
            guard_potential(m, f.at(i, j));
            cplx lam = eval_lambda(m, f.at(i, j));
            out.set(i, j, fzzb.at(i, j) + lam * fz.at(i, j) * fzb.at(i, j));
        }
    return out;
}

namespace detail {

inline double sor_omega(const GridSpec& g) {
    double rho = 0.5 * (std::cos(M_PI / (g.nx - 1)) + std::cos(M_PI / (g.ny - 1)));
    double w = 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
    return std::min(w, 1.95);
}

// Discrete harmonic extension of the edge values (SOR on the 5-point Laplace
// equation); also the lambda = 0 initial guess of the nonlinear solver.
inline Field harmonic_extension(const Field& boundary) {
    const GridSpec& g = boundary.grid;
    Field f(g);
    for (int i = 0; i < g.nx; ++i) {
        f.set(i, 0, boundary.at(i, 0));
        f.set(i, g.ny - 1, boundary.at(i, g.ny - 1));
    }
    for (int j = 0; j < g.ny; ++j) {
        f.set(0, j, boundary.at(0, j));
        f.set(g.nx - 1, j, boundary.at(g.nx - 1, j));
    }
    // bilinear blend seed, then SOR
    for (int j = 1; j <= g.ny - 2; ++j)
        for (int i = 1; i <= g.nx - 2; ++i) {
            double tx = double(i) / (g.nx - 1), ty = double(j) / (g.ny - 1);
            cplx ex = (1 - tx) * f.at(0, j) + tx * f.at(g.nx - 1, j);
            cplx ey = (1 - ty) * f.at(i, 0) + ty * f.at(i, g.ny - 1);
            cplx exy = (1 - tx) * (1 - ty) * f.at(0, 0) + tx * (1 - ty) * f.at(g.nx - 1, 0) +
                       (1 - tx) * ty * f.at(0, g.ny - 1) + tx * ty * f.at(g.nx - 1, g.ny - 1);
            f.set(i, j, ex + ey - exy);
        }
    double om = sor_omega(g);
    int sweeps = 6 * std::max(g.nx, g.ny);
    for (int s = 0; s < sweeps; ++s)
        for (int j = 1; j <= g.ny - 2; ++j)
            for (int i = 1; i <= g.nx - 2; ++i) {
                cplx gs = 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) +
                                  f.at(i, j + 1) + f.at(i, j - 1));
                f.set(i, j, (1.0 - om) * f.at(i, j) + om * gs);
            }
    return f;
}

// One SOR pass for the linearized operator
//   J d = Delta d / 4 + a d_zbar + b d_z + c d      (a = lam f_z, b = lam f_zbar,
// with d = 0 on the boundary.                        c = lam' f_z f_zbar)
struct LinearizedOp {
    const GridSpec* g;
    std::vector<cplx> a, b, c, rhs;

    cplx apply_at(const std::vector<cplx>& d, int i, int j) const {
        int n = g->nx, id = j * n + i;
        double h = g->h, h2 = h * h;
        cplx E = d[id + 1], W = d[id - 1], N = d[id + n], S = d[id - n], C = d[id];
        cplx lap4 = (E + W + N + S - 4.0 * C) / (4.0 * h2);
        cplx dz = ((E - W) - cplx(0, 1) * (N - S)) / (4.0 * h);
        cplx dzb = ((E - W) + cplx(0, 1) * (N - S)) / (4.0 * h);
        return lap4 + a[id] * dzb + b[id] * dz + c[id] * C;
    }

    double residual_inf(const std::vector<cplx>& d) const {
        double r = 0.0;
        for (int j = 1; j <= g->ny - 2; ++j)
            for (int i = 1; i <= g->nx - 2; ++i)
                r = std::max(r, std::abs(rhs[j * g->nx + i] - apply_at(d, i, j)));
        return r;
    }

    void sor_sweep(std::vector<cplx>& d, double om) const {
        int n = g->nx;
        double h = g->h, h2 = h * h;
        cplx iu(0, 1);
        for (int j = 1; j <= g->ny - 2; ++j)
            for (int i = 1; i <= g->nx - 2; ++i) {
                int id = j * n + i;
                cplx cE = 1.0 / (4.0 * h2) + (a[id] + b[id]) / (4.0 * h);
                cplx cW = 1.0 / (4.0 * h2) - (a[id] + b[id]) / (4.0 * h);
                cplx cN = 1.0 / (4.0 * h2) + iu * (a[id] - b[id]) / (4.0 * h);
                cplx cS = 1.0 / (4.0 * h2) - iu * (a[id] - b[id]) / (4.0 * h);
                cplx diag = -1.0 / h2 + c[id];
                cplx gs = (rhs[id] - cE * d[id + 1] - cW * d[id - 1] -
                           cN * d[id + n] - cS * d[id - n]) / diag;
                d[id] = (1.0 - om) * d[id] + om * gs;
            }
    }
};

} // namespace detail

inline std::pair<Field, SolveReport> solve_dirichlet(const Field& boundary, const Metric& m,
                                                     const GridSpec& g,
                                                     const SolveParams& prm = {}) {
    if (!boundary.grid.same_as(g)) fail("grid-mismatch", "boundary field is on a different grid");
    for (int i = 0; i < g.nx; ++i)
        for (int j : {0, g.ny - 1})
            if (!std::isfinite(boundary.at(i, j).real()) || !std::isfinite(boundary.at(i, j).imag()))
                fail("bad-boundary", "non-finite boundary value");
    for (int j = 0; j < g.ny; ++j)
        for (int i : {0, g.nx - 1})
            if (!std::isfinite(boundary.at(i, j).real()) || !std::isfinite(boundary.at(i, j).imag()))
                fail("bad-boundary", "non-finite boundary value");

    Field f = detail::harmonic_extension(boundary);
    SolveReport rep;
    auto resid_of = [&](const Field& cur) {
        Field T = tension_residual(cur, m);
        double r = max_abs(T, true);
        return std::make_pair(std::move(T), r);
    };

    if (prm.method == "relax") {
        double om = prm.theta;
        long sweep = 0;
        double h2 = g.h * g.h;
        while (sweep < prm.max_iters) {
            for (int j = 1; j <= g.ny - 2; ++j)
                for (int i = 1; i <= g.nx - 2; ++i) {
                    guard_potential(m, f.at(i, j));
                    cplx lam = eval_lambda(m, f.at(i, j));
                    cplx dx = f.at(i + 1, j) - f.at(i - 1, j);
                    cplx dy = f.at(i, j + 1) - f.at(i, j - 1);
                    cplx fz = (dx - cplx(0, 1) * dy) / (4.0 * g.h);
                    cplx fzb = (dx + cplx(0, 1) * dy) / (4.0 * g.h);
                    cplx gs = 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) +
                                      f.at(i, j + 1) + f.at(i, j - 1)) +
                              h2 * lam * fz * fzb;
                    f.set(i, j, (1.0 - om) * f.at(i, j) + om * gs);
                }
            ++sweep;
            if (sweep % prm.report_every == 0 || sweep == prm.max_iters) {
                double r = max_abs(tension_residual(f, m), true);
                rep.residual_history.push_back(r);
                rep.final_residual = r;
                rep.iterations = sweep;
                if (r <= prm.tol * (1.0 + max_abs(f))) { rep.converged = true; break; }
            }
        }
        return {f, rep};
    }

    // Newton outer / SOR inner
    const GridSpec* gp = &g;
    detail::LinearizedOp op;
    op.g = gp;
    op.a.assign(g.count(), 0.0); op.b.assign(g.count(), 0.0);
    op.c.assign(g.count(), 0.0); op.rhs.assign(g.count(), 0.0);
    double om = detail::sor_omega(g);
    int inner_cap = 60 * std::max(g.nx, g.ny);
    long total_sweeps = 0;
    const int max_outer = 60;

    auto [T0, r0] = resid_of(f);
    Field T = std::move(T0);
    double resid = r0;
    rep.residual_history.push_back(resid);

    for (int outer = 0; outer < max_outer; ++outer) {
        rep.iterations = outer;
        rep.final_residual = resid;
        if (resid <= prm.tol * (1.0 + max_abs(f))) { rep.converged = true; break; }
        if (total_sweeps >= prm.max_iters) break;

        Field fz = wirtinger_z(f), fzb = wirtinger_zbar(f);
        for (int j = 1; j <= g.ny - 2; ++j)
            for (int i = 1; i <= g.nx - 2; ++i) {
                int id = g.idx(i, j);
                cplx fv = f.at(i, j);
                cplx lam = eval_lambda(m, fv);
                op.a[id] = lam * fz.at(i, j);
                op.b[id] = lam * fzb.at(i, j);
                op.c[id] = eval_lambda_prime(m, fv) * fz.at(i, j) * fzb.at(i, j);
                op.rhs[id] = -T.at(i, j);
            }

        std::vector<cplx> d(g.count(), 0.0);
        double target = std::max(0.15 * resid, 0.9 * prm.tol);
        for (int s = 0; s < inner_cap; ++s) {
            op.sor_sweep(d, om);
            ++total_sweeps;
            if (s % 20 == 19 || s == inner_cap - 1)
                if (op.residual_inf(d) <= target) break;
        }

        // damped update with halving backtrack on the true residual
        double step = prm.theta;
        Field best = f; double best_r = resid; bool improved = false;
        for (int bt = 0; bt < 6; ++bt) {
            Field trial = f;
            for (int k = 0; k < g.count(); ++k) trial.v[k] += step * d[k];
            auto [Tt, rt] = resid_of(trial);
            if (rt < best_r) { best = std::move(trial); best_r = rt; T = std::move(Tt); improved = true; break; }
            step *= 0.5;
        }
        if (!improved) { rep.final_residual = resid; break; }
        f = std::move(best);
        resid = best_r;
        rep.residual_history.push_back(resid);
    }
    if (!rep.converged) {
        auto [Tf, rf] = resid_of(f);
        rep.final_residual = rf;
        rep.converged = rf <= prm.tol * (1.0 + max_abs(f));
    }
    return {f, rep};
}

} // namespace tensionlab

#endif
