#include <cmath>
#include <complex>

#include "catch_amalgamated.hpp"

#include "tensionlab/closed_forms.hpp"
#include "tensionlab/grid.hpp"
#include "tensionlab/metric.hpp"

using namespace tensionlab;

TEST_CASE("linear maps carry the textbook constants") {
    LinearMap lm{cplx{2.0, 0.0}};
    CHECK(std::abs(lm.mu() - cplx{-0.5, 0.0}) < 1e-15);
    CHECK(lm.K() == Catch::Approx(3.0));

    LinearMap id{cplx{1.0, 0.0}};
    CHECK(std::abs(id.mu()) == 0.0);
    CHECK(id.K() == Catch::Approx(1.0));

    // inverse really inverts
    for (cplx z : {cplx{0.3, 0.7}, cplx{-1.2, 0.05}, cplx{0.0, 0.0}}) {
        CHECK(std::abs(lm.inverse(lm.f(z)) - z) < 1e-14);
        CHECK(std::abs(lm.f(lm.inverse(z)) - z) < 1e-14);
    }

    try {
        LinearMap bad{cplx{0.4, 0.0}}; // |a| = 0.4 < |1 - a| = 0.6
        (void)bad;
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "orientation-violation");
    }
}

TEST_CASE("tanh strip evaluator matches its frozen values") {
    TanhStrip ts;
    CHECK(ts.f({1.0, 0.0}).real() == Catch::Approx(0.4337809).margin(5e-7));
    CHECK(ts.f({1.0, 0.25}).imag() == 0.25);
    CHECK(ts.mu({1.0, 0.0}).real() == Catch::Approx(-0.1353353).margin(5e-8));
    CHECK(std::abs(ts.phi({1.7, 0.3}) - cplx{-0.25, 0.0}) == 0.0);

    // internal consistency: mu = fzb / fz and |mu| = |phi| / sigma^2
    for (double x : {0.6, 1.0, 2.2}) {
        cplx z{x, 0.4};
        CHECK(std::abs(ts.fzb(z) / ts.fz(z) - ts.mu(z)) < 1e-15);
        CHECK(std::abs(ts.mu(z)) == Catch::Approx(0.25 / ts.sigma2(z)));
        CHECK(ts.log_abs_mu(z) == Catch::Approx(std::log(std::abs(ts.mu(z)))));
        CHECK(ts.log_sigma(z) == Catch::Approx(0.5 * std::log(ts.sigma2(z))));
    }

    // sampler agrees with the evaluator at the nodes exactly
    GridSpec g{0.5, 0.0, 9, 5, 0.25};
    Field f = ts.sample_map(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            CHECK(f.at(i, j) == ts.f(g.node(i, j)));

    try {
        ts.sample_map(GridSpec{-0.5, 0.0, 9, 5, 0.25});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "domain-includes-degeneracy");
    }
}

TEST_CASE("strip profile closed forms at the origin") {
    StripProfileParams p{1.0, ProfileVariant::paper};
    // E(0) = 1: mu(0) = -1/(2 + sqrt(3)), u'(0) = 1/sqrt(3)
    CHECK(strip_profile_mu(0.0, p) == Catch::Approx(-0.2679492).margin(5e-8));
    CHECK(strip_profile_uprime(0.0, p) == Catch::Approx(0.5773503).margin(5e-8));
    CHECK(strip_profile_mu(0.0, p) == Catch::Approx(-(2.0 - std::sqrt(3.0))));

    try {
        StripProfileParams bad{-1.0};
        (void)bad;
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "bad-parameter");
    }
}

TEST_CASE("strip profile coefficient stays admissible across the strip") {
    // |mu| climbs toward 1 on the right while u' decays to 0; admissibility
    // means the climb never actually reaches the unit circle
    StripProfileParams p{1.0, ProfileVariant::paper};
    double prev_mu = 0.0;
    for (double x = -20.0; x <= 40.0; x += 0.25) {
        double mu = strip_profile_mu(x, p);
        CHECK(mu < 0.0);
        CHECK(mu > -1.0);
        CHECK(mu < prev_mu);
        prev_mu = mu;
        CHECK(strip_profile_uprime(x, p) > 0.0);
    }
    CHECK(strip_profile_uprime(-20.0, p) > 0.99);
    CHECK(strip_profile_uprime(-20.0, p) < 1.0);

    // the faster-decaying corrected variant behaves the same on its own range
    StripProfileParams q{1.0, ProfileVariant::corrected};
    for (double x = -10.0; x <= 20.0; x += 0.25) {
        double mu = strip_profile_mu(x, q);
        CHECK(mu < 0.0);
        CHECK(mu > -1.0);
    }
}

TEST_CASE("profile derivative matches a finite-difference probe") {
    StripProfileParams p{1.3, ProfileVariant::corrected};
    double h = 1e-5;
    for (double x : {-3.0, 0.0, 1.7, 6.0}) {
        double fd = (strip_profile_mu(x + h, p) - strip_profile_mu(x - h, p)) / (2 * h);
        CHECK(strip_profile_mu_prime(x, p) == Catch::Approx(fd).margin(1e-8));
    }
}

TEST_CASE("profile satisfies its defining decay relation") {
    // d/dx log( mu (1+mu)^{-2} ) equals the decay rate: 1 for the original
    // profile, 2 for the corrected one. Checked with central differences.
    auto lhs = [](double x, const StripProfileParams& p) {
        double mu = strip_profile_mu(x, p);
        return std::log(-mu) - 2.0 * std::log(1.0 + mu);
    };
    double h = 1e-5;
    for (auto [variant, rate] : {std::pair{ProfileVariant::paper, 1.0},
                                 std::pair{ProfileVariant::corrected, 2.0}}) {
        StripProfileParams p{1.0, variant};
        for (double x : {-2.0, 0.0, 3.0}) {
            double d = (lhs(x + h, p) - lhs(x - h, p)) / (2 * h);
            CHECK(d == Catch::Approx(rate).margin(1e-6));
        }
    }
}

TEST_CASE("twist residual separates the two profile variants") {
    StripProfileParams paper{1.0, ProfileVariant::paper};
    StripProfileParams corr{1.0, ProfileVariant::corrected};
    for (double x : {-1.0, 0.0, 0.5, 2.0}) {
        double mu = strip_profile_mu(x, paper);
        // the original profile misses the twist equation by exactly |mu(1+mu)|/2
        CHECK(strip_profile_twist_residual(x, paper) ==
              Catch::Approx(std::abs(mu * (1.0 + mu)) / 2.0).margin(1e-12));
        CHECK(strip_profile_twist_residual(x, corr) < 1e-12);
    }
    CHECK(strip_profile_twist_residual(0.0, paper) > 0.05);
}

TEST_CASE("profile tail obeys the integrated decay bound") {
    StripProfileParams p{1.0, ProfileVariant::paper};
    // u' <= sqrt(E/2) = sqrt(c/2) e^{-x/2} pointwise, so the tail integral is
    // below 2 sqrt(c/2) e^{-10}; the margin is a few parts in ten thousand
    double tail = strip_profile_u(40.0, p) - strip_profile_u(20.0, p);
    double bound = 2.0 * std::sqrt(p.c / 2.0) * std::exp(-10.0);
    CHECK(tail > 0.0);
    CHECK(tail <= bound);

    double ratio = strip_profile_uprime(20.0, p) / (std::sqrt(0.5) * std::exp(-10.0));
    CHECK(ratio > 0.99);
    CHECK(ratio < 1.01);
}

TEST_CASE("phase class coefficients and their analytic derivatives") {
    Metric ex = builtin_metric("exp_x");
    for (int s : {+1, -1}) {
        PhaseClassCoefficient cls{cplx{0.3, -0.1}, ex, s};
        cplx w{0.4, 0.7};
        CHECK(std::abs(cls.mu(w)) == Catch::Approx(std::abs(cplx{0.3, -0.1})));

        // finite-difference cross-check of mu_w and mu_wbar
        double h = 1e-5;
        cplx dx = (cls.mu(w + h) - cls.mu(w - h)) / (2 * h);
        cplx dy = (cls.mu(w + cplx{0, h}) - cls.mu(w - cplx{0, h})) / (2 * h);
        cplx fd_w = 0.5 * (dx - cplx{0, 1} * dy);
        cplx fd_wb = 0.5 * (dx + cplx{0, 1} * dy);
        CHECK(std::abs(cls.mu_w(w) - fd_w) < 1e-9);
        CHECK(std::abs(cls.mu_wbar(w) - fd_wb) < 1e-9);
    }

    CHECK_THROWS_AS((PhaseClassCoefficient{cplx{1.2, 0.0}, ex, 1}), error);
    try {
        PhaseClassCoefficient cls{cplx{0.3, 0.0}, builtin_metric("gauss_nonflat"), 1};
        (void)cls;
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "not-flat");
    }
}

TEST_CASE("exp_y coefficient variants differ in their exponent") {
    ExpYCoefficient derived{cplx{0.3, 0.0}, true};
    ExpYCoefficient literal{cplx{0.3, 0.0}, false};
    cplx w{2.0, -1.0};
    CHECK(std::abs(derived.mu(w) - 0.3 * std::exp(cplx{0.0, -2.0})) < 1e-15);
    CHECK(std::abs(literal.mu(w) - 0.3 * std::exp(cplx{0.0, 1.0})) < 1e-15);

    double h = 1e-5;
    cplx dx = (derived.mu(w + h) - derived.mu(w - h)) / (2 * h);
    cplx dy = (derived.mu(w + cplx{0, h}) - derived.mu(w - cplx{0, h})) / (2 * h);
    CHECK(std::abs(derived.mu_w(w) - 0.5 * (dx - cplx{0, 1} * dy)) < 1e-9);
    CHECK(std::abs(derived.mu_wbar(w) - 0.5 * (dx + cplx{0, 1} * dy)) < 1e-9);
}

TEST_CASE("synthetic bump has an interior distortion peak") {
    SyntheticBump bump;
    double h = 1e-5;
    cplx z{0.4, -0.3};
    cplx dx = (bump.f(z + h) - bump.f(z - h)) / (2 * h);
    cplx dy = (bump.f(z + cplx{0, h}) - bump.f(z - cplx{0, h})) / (2 * h);
    CHECK(std::abs(bump.fz(z) - 0.5 * (dx - cplx{0, 1} * dy)) < 1e-9);
    CHECK(std::abs(bump.fzb(z) - 0.5 * (dx + cplx{0, 1} * dy)) < 1e-9);

    double at0 = std::abs(bump.fzb({0, 0}) / bump.fz({0, 0}));
    CHECK(at0 == Catch::Approx(0.3));
    double at_edge = std::abs(bump.fzb({1.5, 0.0}) / bump.fz({1.5, 0.0}));
    CHECK(at0 > at_edge); // peak sits strictly inside
}
