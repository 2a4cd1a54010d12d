#ifndef TENSIONLAB_CLOSED_FORMS_HPP
#define TENSIONLAB_CLOSED_FORMS_HPP

#include <cmath>
#include <functional>
#include <string>

#include "grid.hpp"
#include "metric.hpp"

// Exact analytic fixtures. Every fixture exposes closed-form evaluators (map,
// derivatives, coefficient, and the auxiliary fields the audits consume) plus
// grid samplers; sampler-of-evaluator agrees at nodes exactly by construction.

namespace tensionlab {

// ---------------------------------------------------------------------------
// Linear family f = a z + (1-a) zbar, the exactly-solvable harmonic maps of
// the Euclidean target. Orientation needs |a| > |1-a|.
struct LinearMap {
    cplx a, b; // b = 1 - a

    explicit LinearMap(cplx a_) : a(a_), b(cplx(1, 0) - a_) {
        if (!(std::abs(a) > std::abs(b)))
            fail("orientation-violation", "need |a| > |1-a| for a sense-preserving map");
    }

    cplx f(cplx z) const { return a * z + b * std::conj(z); }
    cplx mu() const { return b / a; }
    double K() const { return (std::abs(a) + std::abs(b)) / (std::abs(a) - std::abs(b)); }
    cplx inverse(cplx w) const {
        double det = std::norm(a) - std::norm(b);
        return (std::conj(a) * w - b * std::conj(w)) / det;
    }
    Field sample_map(const GridSpec& g) const {
        return tensionlab::sample(g, [&](cplx z) { return f(z); });
    }
};

// ---------------------------------------------------------------------------
// The tanh strip map f(z) = log cosh(x - s) + i y, the canonical
// nonconstant-|mu| harmonic map into rho = e^{2x}. Its ground truth rests on
// u'' = 1 - u'^2 for u = log cosh. Degenerate on x = s, so domains must stay
// strictly to the right of the shift.
struct TanhStrip {
    double shift = 0.0;

    explicit TanhStrip(double s = 0.0) : shift(s) {}

    void check_domain(const GridSpec& g) const {
        if (g.x0 <= shift)
            fail("domain-includes-degeneracy", "rectangle touches x <= shift");
    }

    double u(double x) const { return std::log(std::cosh(x - shift)); }
    double uprime(double x) const { return std::tanh(x - shift); }

    cplx f(cplx z) const { return {u(z.real()), z.imag()}; }
    cplx fz(cplx z) const { return {(uprime(z.real()) + 1.0) / 2.0, 0.0}; }
    cplx fzb(cplx z) const { return {(uprime(z.real()) - 1.0) / 2.0, 0.0}; }
    cplx mu(cplx z) const { return {-std::exp(-2.0 * (z.real() - shift)), 0.0}; }
    double log_abs_mu(cplx z) const { return -2.0 * (z.real() - shift); }
    cplx phi(cplx) const { return {-0.25, 0.0}; }
    double sigma2(cplx z) const { return std::exp(2.0 * (z.real() - shift)) / 4.0; }
    double log_sigma(cplx z) const { return (z.real() - shift) - std::log(2.0); }

    Field sample_map(const GridSpec& g) const {
        check_domain(g);
        return tensionlab::sample(g, [&](cplx z) { return f(z); });
    }
};

// ---------------------------------------------------------------------------
// Decaying-coefficient strip profile: a real coefficient mu(x) in (-1,0) with
// mu (1+mu)^{-2} proportional to an exponential, and the associated map
// f = u(x) + i y. Two variants ship: the "paper" one (coefficient decays like
// e^{-x}) and the "corrected" one (e^{-2x}); the second is the one whose
// twisted coefficient is exactly quasiregular, and the audit quantifies the
// difference rather than hiding it.
enum class ProfileVariant { paper, corrected };

struct StripProfileParams {
    double c = 1.0;
    ProfileVariant variant = ProfileVariant::paper;

    StripProfileParams(double c_ = 1.0, ProfileVariant v = ProfileVariant::paper)
        : c(c_), variant(v) {
        if (!(c > 0)) fail("bad-parameter", "profile needs c > 0");
    }
};

namespace detail {

// E = c e^{-x} (or c e^{-2x}); all profile quantities are stable rational
// functions of E and S = sqrt(E (E+2)) = sqrt(q^2 - 1), q = 1 + E.
inline double profile_E(double x, const StripProfileParams& p) {
    double s = (p.variant == ProfileVariant::paper) ? 1.0 : 2.0;
    return p.c * std::exp(-s * x);
}
inline double profile_E_prime(double x, const StripProfileParams& p) {
    double s = (p.variant == ProfileVariant::paper) ? 1.0 : 2.0;
    return -s * profile_E(x, p);
}

} // namespace detail

// mu = sqrt(q^2-1) - q written as -1/(q + sqrt(q^2-1)): exact and free of the
// large-E cancellation.
inline double strip_profile_mu(double x, const StripProfileParams& p) {
    double E = detail::profile_E(x, p);
    double S = std::sqrt(E * (E + 2.0));
    return -1.0 / (1.0 + E + S);
}

inline double strip_profile_mu_prime(double x, const StripProfileParams& p) {
    double E = detail::profile_E(x, p);
    double S = std::sqrt(E * (E + 2.0));
    // d mu / dE = 1/(S (q+S)) = -mu/S, so mu' = -mu E'/S
    return -strip_profile_mu(x, p) * detail::profile_E_prime(x, p) / S;
}

// u' = -1 + 2/(2 + E - sqrt(E(E+2))); rationalizing the denominator collapses
// it to sqrt(E/(E+2)), which is exact and avoids losing the tiny 1 - u'
// margin at very negative x.
inline double strip_profile_uprime(double x, const StripProfileParams& p) {
    double E = detail::profile_E(x, p);
    return std::sqrt(E / (E + 2.0));
}

// Quasiregular twist residual of the profile coefficient:
//   Q(x) = | mu'(x) (1 - mu(x)) / 2 - mu(x) (1 + mu(x)) |.
// The corrected decay rate satisfies mu' (1 - mu) = 2 mu (1 + mu), so Q
// vanishes identically; the paper decay rate has mu' (1 - mu) = mu (1 + mu)
// and leaves the structural defect Q(x) = |mu (1 + mu)| / 2.
inline double strip_profile_twist_residual(double x, const StripProfileParams& p) {
    double mu = strip_profile_mu(x, p);
    double mup = strip_profile_mu_prime(x, p);
    return std::abs(mup * (1.0 - mu) / 2.0 - mu * (1.0 + mu));
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0) fail("quadrature-failure", "adaptive refinement did not converge");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

} // namespace detail

// u(x) = integral of u' from 0, adaptive Simpson. The tail-bound audit needs
// absolute accuracy well under 1e-9, hence the tight default.
inline double strip_profile_u(double x, const StripProfileParams& p, double tol = 1e-12) {
    return detail::adaptive_simpson([&](double t) { return strip_profile_uprime(t, p); },
                                    0.0, x, tol);
}

inline Field strip_profile_map(const GridSpec& g, const StripProfileParams& p) {
    // u sampled per column, integrating column-to-column to keep the cost at
    // O(nx) quadratures.
    std::vector<double> ucol(g.nx);
    for (int i = 0; i < g.nx; ++i) {
        double x = g.x0 + i * g.h;
        double prev_x = (i == 0) ? 0.0 : g.x0 + (i - 1) * g.h;
        double base = (i == 0) ? 0.0 : ucol[i - 1];
        ucol[i] = base + detail::adaptive_simpson(
                             [&](double t) { return strip_profile_uprime(t, p); },
                             prev_x, x, 1e-13);
    }
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.set(i, j, cplx(ucol[i], g.y0 + j * g.h));
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient classes alpha * e^{s i v(w)} on a flat metric, with their exact
// Wirtinger derivatives (v_w = -i lambda for v = Im H):
//   mu_w = s mu lambda,   mu_wbar = -s mu conj(lambda).
// s = -1 is the class whose Beltrami solutions invert to genuinely harmonic
// maps; s = +1 is the conjugate-phase class satisfying the transport identity
// in its other sign convention. Both are first-class fixtures.
struct PhaseClassCoefficient {
    cplx alpha;
    Metric metric;
    int s = 1;

    PhaseClassCoefficient(cplx a, const Metric& m, int sign) : alpha(a), metric(m), s(sign) {
        if (!(std::abs(a) < 1.0)) fail("alpha-out-of-disk", "need |alpha| < 1");
        if (!m.flat) fail("not-flat", "phase classes need a global conjugate v");
    }

    cplx mu(cplx w) const {
        return alpha * std::exp(cplx(0, double(s) * eval_v(metric, w)));
    }
    cplx mu_w(cplx w) const { return double(s) * mu(w) * eval_lambda(metric, w); }
    cplx mu_wbar(cplx w) const {
        return -double(s) * mu(w) * std::conj(eval_lambda(metric, w));
    }
    Field sample(const GridSpec& g) const {
        return tensionlab::sample(g, [&](cplx w) { return mu(w); });
    }
};

// The two exp_y example coefficients: "paper" alpha e^{i Re w / 2} and the
// derived alpha e^{-i Re w} (the latter is the s=+1 phase class of exp_y).
struct ExpYCoefficient {
    cplx alpha;
    bool derived = true;

    ExpYCoefficient(cplx a, bool derived_variant) : alpha(a), derived(derived_variant) {
        if (!(std::abs(a) < 1.0)) fail("alpha-out-of-disk", "need |alpha| < 1");
    }
    double a_exp() const { return derived ? -1.0 : 0.5; }
    cplx mu(cplx w) const { return alpha * std::exp(cplx(0, a_exp() * w.real())); }
    cplx mu_w(cplx w) const { return mu(w) * cplx(0, a_exp() / 2.0); }
    cplx mu_wbar(cplx w) const { return mu(w) * cplx(0, a_exp() / 2.0); }
};

// ---------------------------------------------------------------------------
// Synthetic non-harmonic control: f = z + 0.3 e^{-|z|^2} zbar. |mu| has a
// strict interior peak at the origin, so the maximum-principle scan must
// flag it; nothing about it satisfies the tension equation.
struct SyntheticBump {
    double amp = 0.3;

    cplx f(cplx z) const { return z + amp * std::exp(-std::norm(z)) * std::conj(z); }
    cplx fz(cplx z) const {
        return 1.0 - amp * std::conj(z) * std::conj(z) * std::exp(-std::norm(z));
    }
    cplx fzb(cplx z) const { return amp * (1.0 - std::norm(z)) * std::exp(-std::norm(z)); }
    Field sample_map(const GridSpec& g) const {
        return tensionlab::sample(g, [&](cplx z) { return f(z); });
    }
};

} // namespace tensionlab

#endif
