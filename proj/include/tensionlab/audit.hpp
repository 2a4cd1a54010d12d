#ifndef TENSIONLAB_AUDIT_HPP
#define TENSIONLAB_AUDIT_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "beltrami.hpp"
#include "closed_forms.hpp"
#include "io.hpp"
#include "metric.hpp"
#include "qc_analysis.hpp"
#include "tension.hpp"

// The check engine behind `audit`. Each record gets the checks it supports:
// every harmonic-map record is tested for tension residual, Hopf holomorphy,
// the three harmonicity/ratio identities, the companion map and the
// maximum-principle scan; records tagged with a fixture also get exact-error
// rows against the closed form plus analytic injections; records carrying a
// family parameter get the coefficient-class rows (constancy, both signs of
// the inverse-transport identity, twist constancy) instead of the harmonic
// ones, since their stored map is the quasiconformal solution, not the
// harmonic inverse. Discretization-limited checks carry tolerances c * h^2;
// identity rows carry absolute ones. --refine recomputes everything on the
// half-spacing grid (resampling the fixture or reconstructing the member)
// and attaches coarse/fine residual ratios.

namespace tensionlab {

struct AuditParams {
    bool refine = false;
    // absolute tolerances
    double tol_analytic = 1e-10; // closed-form identity rows
    double tol_injected = 1e-12; // analytic-injection rows
    double tol_hopf_deviation = 5e-3;
    double tol_companion_match = 1e-2;
    double tol_mu_constancy = 1e-2;
    // h^2-scaled tolerances: tolerance = c * h^2
    double c_map_error = 5.0;
    double c_mu_error = 5.0;
    double c_tension = 10.0;
    double c_holomorphy = 10.0;
    double c_lemma = 20.0;
    double c_transport = 20.0;
    // the companion map integrates Psi and Phi, so its harmonicity defect
    // carries the antiderivative's accumulated truncation; still O(h^2) but
    // with a visibly larger constant than the pointwise lemma rows
    double c_companion = 200.0;
    // rows differencing an inverted map twice (the lemma harmonicities of a
    // member's inverse) inherit the interpolation roughness of invert_map;
    // measured constants sit near 400, so these run with their own scale
    double c_lemma_inverse = 800.0;
    BeltramiParams beltrami; // for reconstructing members under --refine
};

namespace detail {

// Sample the map a fixture descriptor names. Unknown descriptors fail.
inline Field fixture_sample(const json& fx, const GridSpec& g) {
    std::string name = fx.value("name", "");
    if (name == "tanh_strip") return TanhStrip(fx.value("x_shift", 0.0)).sample_map(g);
    if (name == "linear") {
        cplx a(fx.at("a").at(0).get<double>(), fx.at("a").at(1).get<double>());
        return LinearMap(a).sample_map(g);
    }
    if (name == "bump") {
        SyntheticBump b;
        b.amp = fx.value("amp", 0.3);
        return b.sample_map(g);
    }
    if (name == "profile") {
        StripProfileParams p;
        p.c = fx.value("c", 1.0);
        p.variant = fx.value("variant", std::string("paper")) == "corrected"
                        ? ProfileVariant::corrected
                        : ProfileVariant::paper;
        return strip_profile_map(g, p);
    }
    fail("unknown-name", "no fixture named '" + name + "'");
}

struct CheckSink {
    std::vector<CheckEntry> rows;
    double h = 0.0;

    // compute() returns the residual, or nothing for "not applicable";
    // thrown errors become failed rows (all-degenerate means not applicable).
    void guarded(const std::string& name, std::optional<double> tol,
                 const std::function<std::optional<double>()>& compute) {
        CheckEntry c;
        c.name = name;
        c.grid_h = h;
        if (tol) c.tolerance = tol;
        try {
            std::optional<double> r = compute();
            if (!r) {
                c.verdict = "not-applicable";
            } else {
                c.residual = r;
                c.verdict = !tol ? "info" : (*r <= *tol ? "pass" : "fail");
            }
        } catch (const error& e) {
            c.verdict = (e.code == "all-degenerate") ? "not-applicable" : "fail";
        }
        rows.push_back(std::move(c));
    }

    void value(const std::string& name, double v) {
        guarded(name, std::nullopt, [&]() -> std::optional<double> { return v; });
    }
};

inline double max_abs_diff(const Field& a, const Field& b, bool interior_only = false) {
    double worst = 0.0;
    long n = 0;
    for (int j = 0; j < a.grid.ny; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            if (!a.ok(i, j) || !b.ok(i, j)) continue;
            if (interior_only && !a.grid.interior(i, j)) continue;
            worst = std::max(worst, std::abs(a.at(i, j) - b.at(i, j)));
            ++n;
        }
    if (n == 0) fail("no-valid-interior", "fields share no valid nodes");
    return worst;
}

template <class Fn>
double max_abs_vs(const Field& a, Fn&& ref, bool interior_only = false) {
    double worst = 0.0;
    for (int j = 0; j < a.grid.ny; ++j)
        for (int i = 0; i < a.grid.nx; ++i) {
            if (!a.ok(i, j)) continue;
            if (interior_only && !a.grid.interior(i, j)) continue;
            worst = std::max(worst, std::abs(a.at(i, j) - cplx(ref(a.grid.node(i, j)))));
        }
    return worst;
}

inline std::vector<CheckEntry> collect_checks(const MapRecord& rec, const AuditParams& prm) {
    const Field& F = rec.f;
    const Metric& m = rec.metric;
    const GridSpec& g = F.grid;
    double h = g.h, h2 = h * h;
    std::string fname = rec.fixture.is_object() ? rec.fixture.value("name", "") : "";

    CheckSink sink;
    sink.h = h;
    auto opt = [](double v) { return std::optional<double>(v); };

    if (rec.alpha) {
        // the stored map solves g_wbar = mu g_w for mu = alpha e^{-iv}; audit
        // the coefficient class. Its matching identity sign is -1; the +1
        // rows are reported for contrast, not judged.
        cplx alpha = *rec.alpha;
        PhaseClassCoefficient cls{alpha, m, -1};
        Field mu = beltrami_coefficient(F);

        sink.value("mu-ellipticity", max_abs(mu, true));
        sink.guarded("mu-constancy", opt(prm.tol_mu_constancy),
                     [&]() -> std::optional<double> { return mean_std_abs(mu, true).second; });
        sink.guarded("mu-matches-class", opt(prm.c_mu_error * h2),
                     [&]() -> std::optional<double> {
                         return max_abs_vs(mu, [&](cplx w) { return cls.mu(w); }, true);
                     });
        sink.guarded("inverse-transport-analytic-minus", opt(prm.tol_analytic),
                     [&]() -> std::optional<double> {
                         return max_abs(inverse_beltrami_residual_analytic(cls, m, g, -1));
                     });
        sink.guarded("inverse-transport-analytic-plus", std::nullopt,
                     [&]() -> std::optional<double> {
                         return max_abs(inverse_beltrami_residual_analytic(cls, m, g, +1));
                     });
        sink.guarded("inverse-transport-numeric-minus", opt(prm.c_transport * h2),
                     [&]() -> std::optional<double> {
                         return max_abs(inverse_beltrami_residual(mu, m, -1), true);
                     });
        sink.guarded("inverse-transport-numeric-plus", std::nullopt,
                     [&]() -> std::optional<double> {
                         return max_abs(inverse_beltrami_residual(mu, m, +1), true);
                     });
        sink.guarded("nu-twist-analytic-minus", opt(prm.tol_analytic),
                     [&]() -> std::optional<double> {
                         return constancy_deviation(nu_twist_analytic(cls, m, g, -1));
                     });
        sink.guarded("nu-twist-numeric-minus", opt(prm.c_transport * h2),
                     [&]() -> std::optional<double> {
                         return constancy_deviation(nu_twist(mu, m, -1));
                     });
        sink.guarded("nu-twist-analytic-plus", std::nullopt,
                     [&]() -> std::optional<double> {
                         return constancy_deviation(nu_twist_analytic(cls, m, g, +1));
                     });
        sink.guarded("max-principle", opt(0.0), [&]() -> std::optional<double> {
            MaxPrincipleReport r = max_principle_scan(mu);
            return double(r.maxima.size() + r.minima.size());
        });

        // the harmonic side: invert the stored solution and examine the
        // inverse on the central three-quarters (the window suppresses the
        // boundary pollution of a map that only approximates an entire one)
        Field finv = invert_map(F, g);
        Field mu_inv = beltrami_coefficient(finv);
        sink.guarded("inverse-tension", opt(prm.c_tension * h2 * (1.0 + max_abs(finv))),
                     [&]() -> std::optional<double> {
                         return max_abs(central_window(tension_residual(finv, m), 0.75), true);
                     });
        sink.guarded("inverse-mu-constancy", opt(prm.tol_mu_constancy),
                     [&]() -> std::optional<double> {
                         return mean_std_abs(central_window(mu_inv, 0.75), true).second;
                     });
        sink.guarded("inverse-mu-modulus", opt(prm.tol_mu_constancy),
                     [&]() -> std::optional<double> {
                         double mean = mean_std_abs(central_window(mu_inv, 0.75), true).first;
                         return std::abs(mean - std::abs(alpha));
                     });
        if (m.flat) {
            sink.guarded("inverse-log-abs-mu-harmonic", opt(prm.c_lemma_inverse * h2),
                         [&]() -> std::optional<double> {
                             std::optional<Field> lm = log_abs_mu_field(finv);
                             if (!lm) return std::nullopt;
                             return harmonic_residual(central_window(*lm, 0.75));
                         });
            sink.guarded("inverse-log-sigma-harmonic", opt(prm.c_lemma_inverse * h2),
                         [&]() -> std::optional<double> {
                             return harmonic_residual(
                                 central_window(log_sigma_field(finv, m), 0.75));
                         });
            sink.guarded("inverse-mu-vs-hopf-ratio", opt(prm.tol_mu_constancy),
                         [&]() -> std::optional<double> {
                             Field phi = central_window(hopf(finv, m), 0.75);
                             Field psi = reconstruct_psi(finv, m);
                             double worst = 0.0;
                             long n = 0;
                             for (int j = 1; j <= g.ny - 2; ++j)
                                 for (int i = 1; i <= g.nx - 2; ++i) {
                                     if (!mu_inv.ok(i, j) || !phi.ok(i, j) || !psi.ok(i, j))
                                         continue;
                                     double p = std::abs(psi.at(i, j));
                                     if (p == 0.0) continue;
                                     worst = std::max(
                                         worst, std::abs(std::abs(mu_inv.at(i, j)) -
                                                         std::abs(phi.at(i, j)) / p));
                                     ++n;
                                 }
                             if (n == 0) return std::nullopt;
                             return worst;
                         });
        }
        sink.guarded("pushforward-roundtrip", opt(prm.tol_mu_constancy),
                     [&]() -> std::optional<double> {
                         Field pf = central_window(pushforward_mu(finv, g), 0.75);
                         double worst = 0.0;
                         long n = 0;
                         for (int j = 0; j < g.ny; ++j)
                             for (int i = 0; i < g.nx; ++i) {
                                 if (!pf.ok(i, j)) continue;
                                 worst = std::max(worst,
                                                  std::abs(pf.at(i, j) - cls.mu(g.node(i, j))));
                                 ++n;
                             }
                         if (n == 0) return std::nullopt;
                         return worst;
                     });
        return std::move(sink.rows);
    }

    // harmonic-map records; for the strip profile everything is reported,
    // not judged (its map realizes printed formulas, not a tension solution)
    bool certify = fname != "profile";
    auto judge = [&](double tol) -> std::optional<double> {
        return certify ? opt(tol) : std::nullopt;
    };

    sink.guarded("tension-residual", judge(prm.c_tension * h2 * (1.0 + max_abs(F))),
                 [&]() -> std::optional<double> {
                     return max_abs(tension_residual(F, m), true);
                 });
    sink.guarded("mu-ellipticity", certify ? opt(1.0) : std::nullopt,
                 [&]() -> std::optional<double> {
                     return max_abs(beltrami_coefficient(F), true);
                 });
    sink.guarded("max-principle", judge(0.0), [&]() -> std::optional<double> {
        MaxPrincipleReport r = max_principle_scan(beltrami_coefficient(F));
        return double(r.maxima.size() + r.minima.size());
    });

    if (m.flat && certify) {
        Field phi = hopf(F, m);
        sink.guarded("hopf-holomorphy", opt(prm.c_holomorphy * h2 * (1.0 + max_abs(phi, true))),
                     [&]() -> std::optional<double> { return holomorphy_residual(phi); });
        sink.guarded("log-abs-mu-harmonic", opt(prm.c_lemma * h2),
                     [&]() -> std::optional<double> { return log_abs_mu_residual(F); });
        sink.guarded("log-sigma-harmonic", opt(prm.c_lemma * h2),
                     [&]() -> std::optional<double> { return log_sigma_residual(F, m); });
        sink.guarded("mu-vs-hopf-ratio", opt(prm.c_lemma * h2),
                     [&]() -> std::optional<double> { return mu_vs_hopf_ratio_residual(F, m); });
        sink.guarded("hopf-arg-harmonic", opt(prm.c_lemma * h2),
                     [&]() -> std::optional<double> {
                         Field masked = phi;
                         double scale = max_abs(phi, true);
                         for (int j = 0; j < g.ny; ++j)
                             for (int i = 0; i < g.nx; ++i)
                                 if (masked.ok(i, j) &&
                                     std::abs(masked.at(i, j)) <= 1e-8 * scale)
                                     masked.mask(i, j);
                         if (count_valid(masked, true) == 0) return std::nullopt;
                         return harmonic_residual(unwrapped_arg(masked));
                     });
        sink.guarded("companion-distortion-match", opt(prm.tol_companion_match),
                     [&]() -> std::optional<double> {
                         return companion_distortion_match(F, m);
                     });
        sink.guarded("companion-harmonicity", opt(prm.c_companion * h2),
                     [&]() -> std::optional<double> {
                         Field hm = companion_map(F, m);
                         Field re(g), im(g);
                         for (int j = 0; j < g.ny; ++j)
                             for (int i = 0; i < g.nx; ++i) {
                                 if (!hm.ok(i, j)) { re.mask(i, j); im.mask(i, j); continue; }
                                 re.set(i, j, hm.at(i, j).real());
                                 im.set(i, j, hm.at(i, j).imag());
                             }
                         return std::max(harmonic_residual(re), harmonic_residual(im));
                     });
    }

    if (fname == "tanh_strip") {
        TanhStrip ts(rec.fixture.value("x_shift", 0.0));
        Field mu = beltrami_coefficient(F);
        sink.guarded("map-error", opt(prm.c_map_error * h2), [&]() -> std::optional<double> {
            return max_abs_diff(F, ts.sample_map(g));
        });
        sink.guarded("mu-error", opt(prm.c_mu_error * h2), [&]() -> std::optional<double> {
            return max_abs_vs(mu, [&](cplx z) { return ts.mu(z); }, true);
        });
        sink.guarded("log-abs-mu-harmonic-injected", opt(prm.tol_injected),
                     [&]() -> std::optional<double> {
                         Field lm = sample(g, [&](cplx z) { return cplx(ts.log_abs_mu(z)); });
                         return harmonic_residual(lm);
                     });
        sink.guarded("hopf-deviation", opt(prm.tol_hopf_deviation),
                     [&]() -> std::optional<double> {
                         return max_abs_vs(hopf(F, m), [&](cplx z) { return ts.phi(z); }, true);
                     });
    } else if (fname == "linear") {
        cplx a(rec.fixture.at("a").at(0).get<double>(), rec.fixture.at("a").at(1).get<double>());
        LinearMap lm(a);
        sink.guarded("map-error", opt(prm.c_map_error * h2), [&]() -> std::optional<double> {
            return max_abs_diff(F, lm.sample_map(g));
        });
        sink.guarded("mu-error", opt(prm.c_mu_error * h2), [&]() -> std::optional<double> {
            return max_abs_vs(beltrami_coefficient(F), [&](cplx) { return lm.mu(); }, true);
        });
        sink.guarded("log-abs-mu-harmonic-injected", opt(prm.tol_injected),
                     [&]() -> std::optional<double> {
                         if (std::abs(lm.mu()) < 1e-8) return std::nullopt; // conformal
                         Field f2 = sample(g, [&](cplx) {
                             return cplx(std::log(std::abs(lm.mu())));
                         });
                         return harmonic_residual(f2);
                     });
        sink.guarded("hopf-deviation", opt(prm.tol_hopf_deviation),
                     [&]() -> std::optional<double> {
                         return max_abs_vs(hopf(F, m),
                                           [&](cplx z) {
                                               return eval_rho(m, lm.f(z)) * lm.a *
                                                      std::conj(lm.b);
                                           },
                                           true);
                     });
    } else if (fname == "bump") {
        SyntheticBump b;
        b.amp = rec.fixture.value("amp", 0.3);
        sink.guarded("map-error", opt(prm.c_map_error * h2), [&]() -> std::optional<double> {
            return max_abs_diff(F, b.sample_map(g));
        });
        sink.guarded("mu-error", opt(prm.c_mu_error * h2), [&]() -> std::optional<double> {
            return max_abs_vs(beltrami_coefficient(F),
                              [&](cplx z) { return b.fzb(z) / b.fz(z); }, true);
        });
    } else if (fname == "profile") {
        StripProfileParams p;
        p.c = rec.fixture.value("c", 1.0);
        p.variant = rec.fixture.value("variant", std::string("paper")) == "corrected"
                        ? ProfileVariant::corrected
                        : ProfileVariant::paper;
        sink.guarded("uprime-positive", opt(0.0), [&]() -> std::optional<double> {
            double worst = -1e300;
            for (int i = 0; i < g.nx; ++i)
                worst = std::max(worst, -strip_profile_uprime(g.x0 + i * h, p));
            return worst; // -min u' <= 0 iff u' >= 0 everywhere
        });
        sink.guarded("sup-u-tail-bound", opt(2.0 * std::sqrt(p.c / 2.0) * std::exp(-10.0)),
                     [&]() -> std::optional<double> {
                         return strip_profile_u(40.0, p) - strip_profile_u(20.0, p);
                     });
        sink.guarded("twist-residual", std::nullopt, [&]() -> std::optional<double> {
            double worst = 0.0;
            for (int i = 0; i < g.nx; ++i)
                worst = std::max(worst, strip_profile_twist_residual(g.x0 + i * h, p));
            return worst;
        });
    }

    return std::move(sink.rows);
}

// Rebuild the record's map on another grid, when the record knows where it
// came from. Solver outputs without a fixture tag cannot be refined.
inline std::optional<MapRecord> regenerate(const MapRecord& rec, const GridSpec& g2,
                                           const BeltramiParams& bp) {
    MapRecord out;
    out.metric = rec.metric;
    out.alpha = rec.alpha;
    out.fixture = rec.fixture;
    if (rec.alpha) {
        out.f = construct_entire(*rec.alpha, rec.metric, g2, bp).g;
        return out;
    }
    if (rec.fixture.is_object()) {
        out.f = detail::fixture_sample(rec.fixture, g2);
        return out;
    }
    return std::nullopt;
}

} // namespace detail

inline AuditReport run_audit(const MapRecord& rec, const std::string& map_id,
                             const AuditParams& prm = {}) {
    AuditReport rep;
    rep.map_id = map_id;
    rep.environment = {{"grid", grid_to_json(rec.f.grid)},
                       {"metric", metric_to_json(rec.metric)},
                       {"refine", prm.refine}};
    rep.checks = detail::collect_checks(rec, prm);

    if (prm.refine) {
        std::optional<MapRecord> fine =
            detail::regenerate(rec, rec.f.grid.refined(), prm.beltrami);
        if (!fine)
            fail("bad-parameter",
                 "--refine needs a record with a fixture tag or a family parameter");
        std::vector<CheckEntry> fine_rows = detail::collect_checks(*fine, prm);
        for (auto& c : rep.checks) {
            if (!c.residual) continue;
            for (const auto& fc : fine_rows)
                if (fc.name == c.name && fc.residual && *fc.residual > 0.0) {
                    c.refinement_ratio = *c.residual / *fc.residual;
                    break;
                }
        }
    }
    return rep;
}

} // namespace tensionlab

#endif
