#ifndef TENSIONLAB_GRID_HPP
#define TENSIONLAB_GRID_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tensionlab {

using cplx = std::complex<double>;

// All failures carry a short machine-readable code ("grid-too-small",
// "not-flat", ...) plus a human message.
struct error : std::runtime_error {
    std::string code;
    error(std::string c, const std::string& msg)
        : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

[[noreturn]] inline void fail(const std::string& code, const std::string& msg) {
    throw error(code, msg);
}

// Uniform rectangular grid with square cells. node(i,j) = (x0+i*h, y0+j*h),
// row-major storage in j then i.
struct GridSpec {
    double x0 = 0.0, y0 = 0.0;
    int nx = 0, ny = 0;
    double h = 0.0;

    GridSpec() = default;
    GridSpec(double x0_, double y0_, int nx_, int ny_, double h_)
        : x0(x0_), y0(y0_), nx(nx_), ny(ny_), h(h_) {
        if (nx < 3 || ny < 3) fail("grid-too-small", "need nx,ny >= 3");
        if (!(h > 0.0)) fail("grid-too-small", "need spacing h > 0");
    }

    int count() const { return nx * ny; }
    int idx(int i, int j) const { return j * nx + i; }
    cplx node(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    bool interior(int i, int j) const { return i >= 1 && i <= nx - 2 && j >= 1 && j <= ny - 2; }
    double x_max() const { return x0 + (nx - 1) * h; }
    double y_max() const { return y0 + (ny - 1) * h; }
    double diam() const {
        double dx = x_max() - x0, dy = y_max() - y0;
        return std::sqrt(dx * dx + dy * dy);
    }
    bool contains(cplx p, double slack = 0.0) const {
        return p.real() >= x0 - slack && p.real() <= x_max() + slack &&
               p.imag() >= y0 - slack && p.imag() <= y_max() + slack;
    }
    bool same_as(const GridSpec& o) const {
        return x0 == o.x0 && y0 == o.y0 && nx == o.nx && ny == o.ny && h == o.h;
    }
    // Same rectangle, spacing halved.
    GridSpec refined() const { return GridSpec(x0, y0, 2 * nx - 1, 2 * ny - 1, h / 2.0); }
};

// Complex samples on a GridSpec. A node may be masked invalid (derivative
// fields mask the boundary; inversion masks uncovered targets). Real-valued
// quantities ride in the real part.
struct Field {
    GridSpec grid;
    std::vector<cplx> v;
    std::vector<std::uint8_t> valid;

    Field() = default;
    explicit Field(const GridSpec& g, cplx fill = {0.0, 0.0})
        : grid(g), v(g.count(), fill), valid(g.count(), 1) {}

    cplx& at(int i, int j) { return v[grid.idx(i, j)]; }
    cplx at(int i, int j) const { return v[grid.idx(i, j)]; }
    bool ok(int i, int j) const { return valid[grid.idx(i, j)] != 0; }
    void set(int i, int j, cplx val) { v[grid.idx(i, j)] = val; }
    void mask(int i, int j) { valid[grid.idx(i, j)] = 0; }

    void mask_boundary() {
        for (int i = 0; i < grid.nx; ++i) { mask(i, 0); mask(i, grid.ny - 1); }
        for (int j = 0; j < grid.ny; ++j) { mask(0, j); mask(grid.nx - 1, j); }
    }
    bool all_valid() const {
        for (auto f : valid) if (!f) return false;
        return true;
    }
};

template <class F>
Field sample(const GridSpec& g, F&& fn) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.set(i, j, cplx(fn(g.node(i, j))));
    return out;
}

// Max |f| over valid nodes (everywhere or interior only).
inline double max_abs(const Field& f, bool interior_only = false) {
    double m = 0.0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!f.ok(i, j)) continue;
            if (interior_only && !f.grid.interior(i, j)) continue;
            m = std::max(m, std::abs(f.at(i, j)));
        }
    return m;
}

inline int count_valid(const Field& f, bool interior_only = false) {
    int n = 0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!f.ok(i, j)) continue;
            if (interior_only && !f.grid.interior(i, j)) continue;
            ++n;
        }
    return n;
}

// Restrict valid flags to the centered sub-rectangle holding `fraction` of
// each side (the usual window for claims polluted near the boundary).
inline Field central_window(const Field& f, double fraction = 0.75) {
    Field out = f;
    double mx = 0.5 * (1.0 - fraction) * (f.grid.nx - 1);
    double my = 0.5 * (1.0 - fraction) * (f.grid.ny - 1);
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            if (i < mx || i > f.grid.nx - 1 - mx || j < my || j > f.grid.ny - 1 - my)
                out.mask(i, j);
    return out;
}

inline std::pair<double, double> mean_std_abs(const Field& f, bool interior_only = true) {
    double s = 0.0; int n = 0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!f.ok(i, j)) continue;
            if (interior_only && !f.grid.interior(i, j)) continue;
            s += std::abs(f.at(i, j)); ++n;
        }
    if (n == 0) fail("no-valid-interior", "no valid nodes for statistics");
    double mean = s / n, q = 0.0;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            if (!f.ok(i, j)) continue;
            if (interior_only && !f.grid.interior(i, j)) continue;
            double d = std::abs(f.at(i, j)) - mean;
            q += d * d;
        }
    return {mean, std::sqrt(q / n)};
}

} // namespace tensionlab

#endif
