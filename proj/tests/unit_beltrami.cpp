#include <cmath>
#include <complex>

#include "catch_amalgamated.hpp"

#include "tensionlab/beltrami.hpp"
#include "tensionlab/closed_forms.hpp"
#include "tensionlab/grid.hpp"
#include "tensionlab/metric.hpp"
#include "tensionlab/qc_analysis.hpp"

using namespace tensionlab;

namespace {

GridSpec normalized_grid(int den) {
    int nx = (int)std::lround(1.5 * den) + 1;
    return GridSpec{-0.25, -0.75, nx, nx, 1.0 / den};
}

} // namespace

TEST_CASE("least-squares solver reproduces the constant-coefficient linear map") {
    GridSpec g{-0.25, -0.25, 25, 25, 1.0 / 16};
    Field mu = sample(g, [](cplx) { return cplx{0.3, 0.0}; });
    Field got = solve_beltrami_ls(mu, {{cplx{0, 0}, cplx{0, 0}}, {cplx{1, 0}, cplx{1, 0}}});

    // g = (w + 0.3 conj w) / 1.3 is the normalized solution
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cplx w = g.node(i, j);
            worst = std::max(worst, std::abs(got.at(i, j) - (w + 0.3 * std::conj(w)) / 1.3));
        }
    CHECK(worst < 1e-5);

    Field gw = wirtinger_z(got), gwb = wirtinger_zbar(got);
    double resid = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i)
            resid = std::max(resid, std::abs(gwb.at(i, j) - 0.3 * gw.at(i, j)));
    CHECK(resid < 1e-4 * max_abs(gw, true));
}

TEST_CASE("least-squares solver validates its inputs") {
    GridSpec g{-0.25, -0.25, 25, 25, 1.0 / 16};
    Field degenerate = sample(g, [](cplx) { return cplx{1.0, 0.0}; });
    try {
        solve_beltrami_ls(degenerate, {{cplx{0, 0}, cplx{0, 0}}, {cplx{1, 0}, cplx{1, 0}}});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "ellipticity-violation");
    }

    Field mu = sample(g, [](cplx) { return cplx{0.3, 0.0}; });
    try {
        solve_beltrami_ls(mu, {{cplx{0, 0}, cplx{0, 0}}});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "bad-parameter");
    }
    try {
        solve_beltrami_ls(mu, {{cplx{0, 0}, cplx{0, 0}}, {cplx{9, 9}, cplx{1, 0}}});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "constraint-outside-grid");
    }
}

TEST_CASE("phase-class coefficients satisfy the transport identity exactly") {
    Metric ex = builtin_metric("exp_x");
    GridSpec g{-0.5, -0.5, 17, 17, 1.0 / 16};
    for (int s : {+1, -1}) {
        PhaseClassCoefficient cls{cplx{0.3, 0.0}, ex, s};
        // matching sign: the grouped expression cancels term by term
        Field match = inverse_beltrami_residual_analytic(cls, ex, g, s);
        CHECK(max_abs(match) < 1e-14);
        // opposite sign: off by 2 mu (lambda + conj(mu) conj(lambda))
        Field off = inverse_beltrami_residual_analytic(cls, ex, g, -s);
        CHECK(max_abs(off) > 0.5);
    }
}

TEST_CASE("numeric transport residual of a sampled class coefficient is second order") {
    Metric ex = builtin_metric("exp_x");
    auto resid = [&](int den) {
        GridSpec g{-0.5, -0.5, den + 1, den + 1, 1.0 / den};
        PhaseClassCoefficient cls{cplx{0.3, 0.0}, ex, +1};
        return max_abs(inverse_beltrami_residual(cls.sample(g), ex, +1), true);
    };
    double r1 = resid(16), r2 = resid(32);
    CHECK(r1 / r2 > 3.0);
    CHECK(r1 / r2 < 5.0);
}

TEST_CASE("matching twist of a class coefficient is constant") {
    Metric ex = builtin_metric("exp_x");
    GridSpec g{-0.5, -0.5, 17, 17, 1.0 / 16};
    PhaseClassCoefficient cls{cplx{0.3, -0.2}, ex, +1};

    CHECK(constancy_deviation(nu_twist_analytic(cls, ex, g, +1)) < 1e-12);
    CHECK(constancy_deviation(nu_twist_analytic(cls, ex, g, -1)) > 0.1);

    // the constant twist also solves the linear Beltrami equation trivially
    CHECK(nu_quasiregular_residual(cls.sample(g), ex, +1) < 1e-10);

    Metric eu = builtin_metric("euclid");
    Field cmu = sample(g, [](cplx) { return cplx{0.25, 0.1}; });
    CHECK(nu_quasiregular_residual(cmu, eu, +1) < 1e-12);
}

TEST_CASE("decaying strip coefficient is not quasiregular under the twist") {
    // the x-only coefficient with the slow decay misses the twist equation by
    // |mu (1 + mu)| / 2, far above discretization noise
    Metric ex = builtin_metric("exp_x");
    StripProfileParams p{1.0, ProfileVariant::paper};
    GridSpec g{-1.0, -1.0, 33, 33, 1.0 / 16};
    Field mu = sample(g, [&](cplx w) { return cplx{strip_profile_mu(w.real(), p), 0.0}; });

    double q = nu_quasiregular_residual(mu, ex, +1);
    CHECK(q > 0.05);

    double want = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        double x = g.x0 + i * g.h;
        double m = strip_profile_mu(x, p);
        want = std::max(want, std::abs(m * (1.0 + m)) / 2.0);
    }
    CHECK(q == Catch::Approx(want).margin(0.01));
}

TEST_CASE("exp_y coefficient: derived variant passes, literal variant fails") {
    Metric ey = builtin_metric("exp_y");
    GridSpec g{-0.5, -0.5, 17, 17, 1.0 / 16};
    ExpYCoefficient derived{cplx{0.3, 0.0}, true};
    ExpYCoefficient literal{cplx{0.3, 0.0}, false};

    CHECK(max_abs(inverse_beltrami_residual_analytic(derived, ey, g, +1)) < 1e-10);

    double lit_best = std::min(max_abs(inverse_beltrami_residual_analytic(literal, ey, g, +1)),
                               max_abs(inverse_beltrami_residual_analytic(literal, ey, g, -1)));
    CHECK(lit_best > 0.01);
}

TEST_CASE("map inversion recovers a linear inverse to machine precision") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    LinearMap lm{cplx{2.0, 0.0}};
    Field f = lm.sample_map(g);
    GridSpec target{-0.5, -0.5, 9, 9, 0.125};
    Field finv = invert_map(f, target);
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            REQUIRE(finv.ok(i, j));
            CHECK(std::abs(finv.at(i, j) - lm.inverse(target.node(i, j))) < 1e-10);
        }
}

TEST_CASE("map inversion round-trips the strip map") {
    TanhStrip ts;
    GridSpec g{0.5, 0.0, 65, 33, 1.0 / 32};
    Field f = ts.sample_map(g);
    GridSpec target{0.3, 0.2, 13, 7, 0.1};
    InvertReport rep;
    Field finv = invert_map(f, target, &rep);
    CHECK(rep.covered > 0);
    double worst = 0.0;
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            if (!finv.ok(i, j)) continue;
            worst = std::max(worst, std::abs(ts.f(finv.at(i, j)) - target.node(i, j)));
        }
    CHECK(worst < 1e-6);
}

TEST_CASE("map inversion refuses an orientation-reversing map") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    Field f = sample(g, [](cplx z) { return std::conj(z); });
    GridSpec target{-0.5, -0.5, 9, 9, 0.125};
    try {
        invert_map(f, target);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "all-degenerate");
    }
}

TEST_CASE("pushforward coefficient of the identity vanishes") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    Field f = sample(g, [](cplx z) { return z; });
    GridSpec target{-0.5, -0.5, 9, 9, 0.125};
    CHECK(max_abs(pushforward_mu(f, target)) < 1e-12);
}

TEST_CASE("pushforward coefficient of a linear map matches the inverse formula") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    cplx a{2.0, 0.0}, b{-0.5, 0.0};
    Field f = sample(g, [&](cplx z) { return a * z + b * std::conj(z); });
    GridSpec target{-0.3, -0.3, 7, 7, 0.1};
    Field mu = pushforward_mu(f, target);
    cplx want = -b / std::conj(a); // the coefficient of the inverse map
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            REQUIRE(mu.ok(i, j));
            CHECK(std::abs(mu.at(i, j) - want) < 1e-10);
        }
}

TEST_CASE("entire family over the plane short-cuts to exact linear members") {
    Metric eu = builtin_metric("euclid");
    GridSpec g = normalized_grid(16);

    EntireFamilyMember id = construct_entire(cplx{0.0, 0.0}, eu, g);
    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            worst = std::max(worst, std::abs(id.f.at(i, j) - g.node(i, j)));
    CHECK(worst < 1e-13);

    EntireFamilyMember mem = construct_entire(cplx{-1.0 / 3.0, 0.0}, eu, g);
    // v = 0, so mu_g = alpha and g = (3w - conj w)/2 after normalization
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cplx w = g.node(i, j);
            CHECK(std::abs(mem.g.at(i, j) - (1.5 * w - 0.5 * std::conj(w))) < 1e-12);
        }
    Field mu_f = beltrami_coefficient(mem.f);
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            if (!mu_f.ok(i, j)) continue;
            CHECK(std::abs(std::abs(mu_f.at(i, j)) - 1.0 / 3.0) < 1e-11);
        }
}

TEST_CASE("entire family member over exp_x has constant-modulus coefficient") {
    Metric ex = builtin_metric("exp_x");
    GridSpec g = normalized_grid(32);
    EntireFamilyMember mem = construct_entire(cplx{0.3, 0.0}, ex, g);

    // the normalization points are honored through interpolation
    CHECK(std::abs(bilinear_sample(mem.g, cplx{0, 0})) < 1e-9);
    CHECK(std::abs(bilinear_sample(mem.g, cplx{1, 0}) - cplx{1, 0}) < 1e-9);

    Field mu_f = central_window(beltrami_coefficient(mem.f), 0.75);
    auto ms = mean_std_abs(mu_f);
    CHECK(ms.first == Catch::Approx(0.3).margin(5e-3));
    CHECK(ms.second < 5e-3);
}

TEST_CASE("entire family construction validates its inputs") {
    Metric ex = builtin_metric("exp_x");
    GridSpec g = normalized_grid(16);
    try {
        construct_entire(cplx{1.0, 0.0}, ex, g);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "alpha-out-of-disk");
    }
    try {
        construct_entire(cplx{0.3, 0.0}, builtin_metric("gauss_nonflat"), g);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "not-flat");
    }
    try {
        construct_entire(cplx{0.3, 0.0}, ex, GridSpec{2.0, 2.0, 9, 9, 0.125});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "constraint-outside-grid");
    }
}
