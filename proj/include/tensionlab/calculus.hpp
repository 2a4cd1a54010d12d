#ifndef TENSIONLAB_CALCULUS_HPP
#define TENSIONLAB_CALCULUS_HPP

#include <algorithm>
#include <cmath>

#include "grid.hpp"

// Finite-difference Wirtinger calculus: d_z = (d_x - i d_y)/2,
// d_zbar = (d_x + i d_y)/2, both by central differences. Derivative fields
// live on interior nodes only; a stencil touching a masked node masks its
// output node. Everything is second order on C^3 fields.

namespace tensionlab {

namespace detail {

inline void require_min_size(const GridSpec& g) {
    if (g.nx < 3 || g.ny < 3) fail("grid-too-small", "stencil needs nx,ny >= 3");
}

template <class Stencil>
Field interior_map(const Field& f, Stencil&& st) {
    require_min_size(f.grid);
    Field out(f.grid);
    out.mask_boundary();
    for (int j = 1; j <= f.grid.ny - 2; ++j)
        for (int i = 1; i <= f.grid.nx - 2; ++i) {
            if (!(f.ok(i, j) && f.ok(i + 1, j) && f.ok(i - 1, j) &&
                  f.ok(i, j + 1) && f.ok(i, j - 1))) {
                out.mask(i, j);
                continue;
            }
            out.set(i, j, st(i, j));
        }
    return out;
}

} // namespace detail

inline Field wirtinger_z(const Field& f) {
    double h4 = 4.0 * f.grid.h;
    return detail::interior_map(f, [&](int i, int j) {
        cplx dx = f.at(i + 1, j) - f.at(i - 1, j);
        cplx dy = f.at(i, j + 1) - f.at(i, j - 1);
        return (dx - cplx(0, 1) * dy) / h4;
    });
}

inline Field wirtinger_zbar(const Field& f) {
    double h4 = 4.0 * f.grid.h;
    return detail::interior_map(f, [&](int i, int j) {
        cplx dx = f.at(i + 1, j) - f.at(i - 1, j);
        cplx dy = f.at(i, j + 1) - f.at(i, j - 1);
        return (dx + cplx(0, 1) * dy) / h4;
    });
}

// f_{z zbar} = Delta_h f / 4 with the 5-point Laplacian.
inline Field mixed_zzbar(const Field& f) {
    double h2 = f.grid.h * f.grid.h;
    return detail::interior_map(f, [&](int i, int j) {
        cplx lap = f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1)
                   - 4.0 * f.at(i, j);
        return lap / (4.0 * h2);
    });
}

// Max over valid interior nodes of |Delta_h u| for a real-valued field.
inline double harmonic_residual(const Field& u) {
    Field lap = mixed_zzbar(u);
    if (count_valid(lap, true) == 0) fail("no-valid-interior", "every interior node is masked");
    return 4.0 * max_abs(lap, true);
}

inline cplx bilinear_sample(const Field& f, cplx p) {
    const GridSpec& g = f.grid;
    if (!g.contains(p)) fail("out-of-domain", "sample point outside the grid rectangle");
    double sx = (p.real() - g.x0) / g.h, sy = (p.imag() - g.y0) / g.h;
    int i = std::min((int)std::floor(sx), g.nx - 2);
    int j = std::min((int)std::floor(sy), g.ny - 2);
    i = std::max(i, 0); j = std::max(j, 0);
    double tx = sx - i, ty = sy - j;
    return (1 - tx) * (1 - ty) * f.at(i, j) + tx * (1 - ty) * f.at(i + 1, j) +
           (1 - tx) * ty * f.at(i, j + 1) + tx * ty * f.at(i + 1, j + 1);
}

// True if the four nodes around p are valid (needed when sampling masked fields).
inline bool bilinear_cell_valid(const Field& f, cplx p) {
    const GridSpec& g = f.grid;
    if (!g.contains(p)) return false;
    double sx = (p.real() - g.x0) / g.h, sy = (p.imag() - g.y0) / g.h;
    int i = std::clamp((int)std::floor(sx), 0, g.nx - 2);
    int j = std::clamp((int)std::floor(sy), 0, g.ny - 2);
    return f.ok(i, j) && f.ok(i + 1, j) && f.ok(i, j + 1) && f.ok(i + 1, j + 1);
}

namespace detail {

// Cubic Lagrange weights and their derivatives on nodes {-1, 0, 1, 2}.
inline void cubic_weights(double t, double w[4], double d[4]) {
    w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
    d[0] = -(3.0 * t * t - 6.0 * t + 2.0) / 6.0;
    d[1] = (3.0 * t * t - 4.0 * t - 1.0) / 2.0;
    d[2] = -(3.0 * t * t - 2.0 * t - 2.0) / 2.0;
    d[3] = (3.0 * t * t - 1.0) / 6.0;
}

} // namespace detail

// Tensor-product cubic Lagrange interpolation on the 4x4 node block around
// the cell containing p, exact on cubics; also returns the x/y partials.
// False when the block runs off the grid or touches a masked node. Points a
// small fraction of a cell outside the grid are allowed (the block clamps and
// the polynomial extrapolates); callers produce such points when they accept
// cell coordinates a hair past the boundary, and refusing them here would
// splice differently-interpolated values into one field.
inline bool bicubic_eval(const Field& f, cplx p, cplx& val, cplx& ddx, cplx& ddy) {
    const GridSpec& g = f.grid;
    if (g.nx < 4 || g.ny < 4 || !g.contains(p, 0.05 * g.h)) return false;
    double sx = (p.real() - g.x0) / g.h, sy = (p.imag() - g.y0) / g.h;
    int i = std::clamp((int)std::floor(sx), 1, g.nx - 3);
    int j = std::clamp((int)std::floor(sy), 1, g.ny - 3);
    for (int b = -1; b <= 2; ++b)
        for (int a = -1; a <= 2; ++a)
            if (!f.ok(i + a, j + b)) return false;
    double wx[4], dx[4], wy[4], dy[4];
    detail::cubic_weights(sx - i, wx, dx);
    detail::cubic_weights(sy - j, wy, dy);
    val = ddx = ddy = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) {
            cplx u = f.at(i - 1 + a, j - 1 + b);
            val += wy[b] * wx[a] * u;
            ddx += wy[b] * dx[a] * u;
            ddy += dy[b] * wx[a] * u;
        }
    ddx /= g.h;
    ddy /= g.h;
    return true;
}

namespace detail {

// Bounding rectangle of the valid nodes (our masked fields are rectangular:
// full grids or interiors of interiors).
struct Rect { int i0, i1, j0, j1; };

inline Rect valid_rect(const Field& f) {
    Rect r{f.grid.nx, -1, f.grid.ny, -1};
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            if (f.ok(i, j)) {
                r.i0 = std::min(r.i0, i); r.i1 = std::max(r.i1, i);
                r.j0 = std::min(r.j0, j); r.j1 = std::max(r.j1, j);
            }
    if (r.i1 < 0) fail("no-valid-interior", "field has no valid nodes");
    return r;
}

// Trapezoidal path integration from a basepoint: first along the basepoint's
// row, then up/down each column. `wx`/`wy` weight the step in the two
// directions (h for real line integrals, i*h vertical for complex
// antiderivatives). Operates on the valid rectangle of `gx`/`gy`.
inline Field path_integrate(const Field& gx, const Field& gy, int bi, int bj,
                            cplx wx, cplx wy) {
    Rect r = valid_rect(gx);
    if (bi < r.i0 || bi > r.i1 || bj < r.j0 || bj > r.j1 || !gx.ok(bi, bj))
        fail("out-of-domain", "basepoint outside the valid region");
    Field out(gx.grid);
    for (int j = 0; j < gx.grid.ny; ++j)
        for (int i = 0; i < gx.grid.nx; ++i)
            if (i < r.i0 || i > r.i1 || j < r.j0 || j > r.j1) out.mask(i, j);
    out.set(bi, bj, 0.0);
    for (int i = bi + 1; i <= r.i1; ++i)
        out.set(i, bj, out.at(i - 1, bj) + wx * 0.5 * (gx.at(i - 1, bj) + gx.at(i, bj)));
    for (int i = bi - 1; i >= r.i0; --i)
        out.set(i, bj, out.at(i + 1, bj) - wx * 0.5 * (gx.at(i + 1, bj) + gx.at(i, bj)));
    for (int i = r.i0; i <= r.i1; ++i) {
        for (int j = bj + 1; j <= r.j1; ++j)
            out.set(i, j, out.at(i, j - 1) + wy * 0.5 * (gy.at(i, j - 1) + gy.at(i, j)));
        for (int j = bj - 1; j >= r.j0; --j)
            out.set(i, j, out.at(i, j + 1) - wy * 0.5 * (gy.at(i, j + 1) + gy.at(i, j)));
    }
    return out;
}

} // namespace detail

// Harmonic conjugate of a real field u: v with v_x = -u_y, v_y = u_x,
// v(basepoint) = 0, integrated row-then-column (trapezoid). Defined on the
// interior of u's valid region; refuses fields that are not discretely
// harmonic since conjugation is ill-defined there.
inline Field harmonic_conjugate(const Field& u, int bi, int bj,
                                double threshold_scale = 1e-3) {
    double res = harmonic_residual(u);
    double thresh = threshold_scale * max_abs(u) + 1e-6;
    if (res > thresh)
        fail("not-harmonic", "harmonic residual " + std::to_string(res) +
                                 " exceeds threshold " + std::to_string(thresh));
    // real-field gradient via the z-derivative: u_x = 2 Re u_z, u_y = -2 Im u_z
    Field gx(u.grid), gy(u.grid);
    Field uz = wirtinger_z(u);
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i) {
            if (!uz.ok(i, j)) { gx.mask(i, j); gy.mask(i, j); continue; }
            double du_dx = 2.0 * uz.at(i, j).real();
            double du_dy = -2.0 * uz.at(i, j).imag();
            gx.set(i, j, -du_dy); // v_x
            gy.set(i, j, du_dx);  // v_y
        }
    return detail::path_integrate(gx, gy, bi, bj, u.grid.h, u.grid.h);
}

// Grid antiderivative F with F' = G along grid paths (dz = h horizontally,
// i*h vertically), F(basepoint) = 0. Path independent up to O(h^2) when G is
// (numerically) holomorphic.
inline Field complex_antiderivative(const Field& G, int bi, int bj) {
    return detail::path_integrate(G, G, bi, bj, G.grid.h, cplx(0, 1) * G.grid.h);
}

} // namespace tensionlab

#endif
