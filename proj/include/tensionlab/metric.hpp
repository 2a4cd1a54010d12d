#ifndef TENSIONLAB_METRIC_HPP
#define TENSIONLAB_METRIC_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "grid.hpp"

// Conformal metric densities rho(w)|dw|. Flat metrics are represented by a
// holomorphic potential H (finite power series), log rho = Re H, which makes
// flatness structural and the coefficient lambda = (log rho)_w = H'/2 and the
// conjugate v = Im H exact. One honest non-flat fixture (log rho = x^2) ships
// for the negative tests; its curvature is computed, never assumed.

namespace tensionlab {

struct Metric {
    std::string id;
    bool flat = true;
    std::vector<cplx> H; // H(w) = sum H[k] w^k, log rho = Re H (flat case)

    // non-flat case: explicit evaluators
    std::function<double(cplx)> log_rho_fn;
    std::function<cplx(cplx)> lambda_fn;       // (log rho)_w
    std::function<cplx(cplx)> lambda_prime_fn; // d/dw of lambda
};

namespace detail {

inline cplx poly_eval(const std::vector<cplx>& c, cplx w) {
    cplx acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * w + c[k];
    return acc;
}

inline std::vector<cplx> poly_derivative(const std::vector<cplx>& c) {
    std::vector<cplx> d;
    for (size_t k = 1; k < c.size(); ++k) d.push_back(double(k) * c[k]);
    return d;
}

} // namespace detail

inline cplx eval_H(const Metric& m, cplx w) {
    if (!m.flat) fail("not-flat", "metric '" + m.id + "' has no holomorphic potential");
    return detail::poly_eval(m.H, w);
}

inline double eval_log_rho(const Metric& m, cplx w) {
    if (!m.flat) return m.log_rho_fn(w);
    return eval_H(m, w).real();
}

inline double eval_rho(const Metric& m, cplx w) { return std::exp(eval_log_rho(m, w)); }

// Reject iterates that have wandered past the range of exp before rho or
// lambda get evaluated there.
inline void guard_potential(const Metric& m, cplx w) {
    double re = eval_log_rho(m, w);
    if (!(std::abs(re) <= 700.0))
        fail("metric-evaluation-failure",
             "|log rho| = " + std::to_string(std::abs(re)) + " exceeds the exp range");
}

inline cplx eval_lambda(const Metric& m, cplx w) {
    if (!m.flat) return m.lambda_fn(w);
    return detail::poly_eval(detail::poly_derivative(m.H), w) * 0.5;
}

inline cplx eval_lambda_prime(const Metric& m, cplx w) {
    if (!m.flat) {
        if (!m.lambda_prime_fn) fail("not-flat", "metric '" + m.id + "' lacks lambda'");
        return m.lambda_prime_fn(w);
    }
    auto d1 = detail::poly_derivative(m.H);
    return detail::poly_eval(detail::poly_derivative(d1), w) * 0.5;
}

// Harmonic conjugate of log rho, normalized as v = Im H. Only flat metrics
// have one globally.
inline double eval_v(const Metric& m, cplx w) {
    if (!m.flat) fail("not-flat", "no global harmonic conjugate for '" + m.id + "'");
    return eval_H(m, w).imag();
}

inline Metric builtin_metric(const std::string& name) {
    Metric m;
    m.id = name;
    if (name == "euclid") {
        m.H = {};
    } else if (name == "exp_x") {
        m.H = {cplx(0, 0), cplx(2, 0)}; // rho = e^{2x}, lambda = 1, v = 2y
    } else if (name == "exp_y") {
        m.H = {cplx(0, 0), cplx(0, -1)}; // rho = e^{Im w}, lambda = -i/2, v = -Re w
    } else if (name == "gauss_nonflat") {
        m.flat = false;
        m.log_rho_fn = [](cplx w) { return w.real() * w.real(); };
        m.lambda_fn = [](cplx w) { return cplx(w.real(), 0.0); };
        m.lambda_prime_fn = [](cplx) { return cplx(0.5, 0.0); };
    } else {
        fail("unknown-name", "no builtin metric named '" + name + "'");
    }
    return m;
}

// Flat metric whose coefficient is exactly the entire function Theta:
// H = 2 * (term-wise antiderivative of Theta), so lambda = H'/2 = Theta.
inline Metric metric_from_theta(const std::vector<cplx>& theta) {
    Metric m;
    m.id = "theta";
    m.H.assign(theta.size() + 1, cplx(0, 0));
    for (size_t k = 0; k < theta.size(); ++k) m.H[k + 1] = 2.0 * theta[k] / double(k + 1);
    return m;
}

// K = -rho^{-2} Delta_h (log rho), sampled on the grid; interior only.
inline Field gaussian_curvature(const Metric& m, const GridSpec& g) {
    Field logrho = sample(g, [&](cplx w) { return cplx(eval_log_rho(m, w), 0.0); });
    Field lap4 = mixed_zzbar(logrho); // Delta_h / 4
    Field out(g);
    out.mask_boundary();
    for (int j = 1; j <= g.ny - 2; ++j)
        for (int i = 1; i <= g.nx - 2; ++i) {
            double rho = eval_rho(m, g.node(i, j));
            out.set(i, j, -4.0 * lap4.at(i, j) / (rho * rho));
        }
    return out;
}

} // namespace tensionlab

#endif
