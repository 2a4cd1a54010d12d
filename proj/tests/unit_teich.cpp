#include <cmath>
#include <complex>

#include "catch_amalgamated.hpp"

#include "tensionlab/beltrami.hpp"
#include "tensionlab/closed_forms.hpp"
#include "tensionlab/grid.hpp"
#include "tensionlab/metric.hpp"
#include "tensionlab/teichmuller.hpp"

using namespace tensionlab;

TEST_CASE("disk distance basics") {
    CHECK(hyperbolic_distance(cplx{0.3, -0.4}, cplx{0.3, -0.4}) == 0.0);
    CHECK(hyperbolic_distance(cplx{0, 0}, cplx{0.5, 0}) ==
          Catch::Approx(std::log(3.0)).margin(1e-12));
    CHECK(hyperbolic_distance(cplx{0.5, 0}, cplx{0, 0}) ==
          hyperbolic_distance(cplx{0, 0}, cplx{0.5, 0}));

    try {
        hyperbolic_distance(cplx{1.0, 0.0}, cplx{0, 0});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "out-of-disk");
    }
}

TEST_CASE("disk distance is a disk-automorphism invariant") {
    // move both points by z -> (z - c) / (1 - conj(c) z)
    cplx c{0.37, -0.21};
    auto moebius = [&](cplx z) { return (z - c) / (1.0 - std::conj(c) * z); };
    cplx a{0.3, 0.0}, b{-0.2, 0.4};
    CHECK(std::abs(hyperbolic_distance(moebius(a), moebius(b)) - hyperbolic_distance(a, b)) <
          1e-12);
}

TEST_CASE("coefficient composition") {
    CHECK(std::abs(compose_mu(cplx{0.3, -0.1}, cplx{0.3, -0.1})) == 0.0);
    CHECK(std::abs(compose_mu(cplx{-0.5, 0}, cplx{0, 0}) - cplx{-0.5, 0}) == 0.0);

    // modulus never depends on the phase factor; multiplication by the axis
    // units is exact in floating point, so these agree bit for bit
    cplx mf{0.3, 0.0}, mg{-0.2, 0.4};
    double base = std::abs(compose_mu(mf, mg));
    for (cplx phase : {cplx{1, 0}, cplx{-1, 0}, cplx{0, 1}, cplx{0, -1}}) {
        CHECK(std::abs(compose_mu(mf, mg, phase)) == base);
    }
    CHECK(base == Catch::Approx(std::abs(mf - mg) / std::abs(1.0 - std::conj(mf) * mg)));

    try {
        compose_mu(cplx{1.0, 0.0}, cplx{1.0, 0.0});
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "degenerate");
    }
}

TEST_CASE("map distance between linear maps is the log of the distortion quotient") {
    GridSpec g{-1.0, -1.0, 33, 33, 1.0 / 16};
    Field id = LinearMap{cplx{1.0, 0.0}}.sample_map(g);
    Field stretch = LinearMap{cplx{2.0, 0.0}}.sample_map(g);

    DistanceReport rep = teich_distance(id, stretch);
    CHECK(rep.d_teich == Catch::Approx(std::log(3.0)).margin(1e-12));
    CHECK(rep.spread < 1e-12);
    CHECK(rep.nodes > 0);

    DistanceReport swapped = teich_distance(stretch, id);
    CHECK(swapped.d_teich == rep.d_teich);

    DistanceReport self = teich_distance(stretch, stretch);
    CHECK(self.d_teich == 0.0);
}

TEST_CASE("map distance satisfies the triangle inequality on linear maps") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    Field a = LinearMap{cplx{1.0, 0.0}}.sample_map(g);
    Field b = LinearMap{cplx{2.0, 0.0}}.sample_map(g);
    Field c = LinearMap{cplx{1.5, 0.3}}.sample_map(g);
    double ab = teich_distance(a, b).d_teich;
    double ac = teich_distance(a, c).d_teich;
    double cb = teich_distance(c, b).d_teich;
    CHECK(ab <= ac + cb + 1e-8);
}

TEST_CASE("map distance input validation") {
    GridSpec g{-1.0, -1.0, 17, 17, 0.125};
    GridSpec other{-1.0, -1.0, 17, 19, 0.125};
    Field a = LinearMap{cplx{2.0, 0.0}}.sample_map(g);
    try {
        teich_distance(a, LinearMap{cplx{2.0, 0.0}}.sample_map(other));
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "grid-mismatch");
    }

    // a map whose differenced coefficient leaves the disk is rejected
    Field bad = sample(g, [](cplx z) { return z + 2.0 * std::conj(z); });
    try {
        teich_distance(a, bad);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "ellipticity-violation");
    }
}

TEST_CASE("family distance over the plane matches the disk exactly") {
    Metric eu = builtin_metric("euclid");
    GridSpec g{-0.25, -0.25, 25, 25, 1.0 / 16};
    IsometryReport rep = isometry_audit(eu, {cplx{0, 0}, cplx{0.3, 0.0}, cplx{-0.2, 0.4}}, g);
    REQUIRE(rep.d_teich.size() == 3);
    CHECK(rep.max_discrepancy < 1e-10);
    CHECK(rep.d_teich[0][0] == 0.0);
    CHECK(rep.d_teich[0][1] == Catch::Approx(rep.d_teich[1][0]));
    CHECK(rep.d_teich[0][1] == Catch::Approx(hyperbolic_distance(cplx{0, 0}, cplx{0.3, 0.0})));
}

TEST_CASE("family distance over exp_x approximates the disk at grid accuracy") {
    Metric ex = builtin_metric("exp_x");
    int den = 32;
    int nx = (int)std::lround(1.5 * den) + 1;
    GridSpec g{-0.25, -0.75, nx, nx, 1.0 / den};
    // this resolution is still edge-artifact dominated (the sup lands next to
    // the boundary), so the bounds are loose; finer grids tighten by ~100x
    IsometryReport rep = isometry_audit(ex, {cplx{0, 0}, cplx{0.3, 0.0}}, g);
    CHECK(rep.max_discrepancy < 5e-2);
    CHECK(rep.max_spread < 5e-2);
    CHECK(rep.d_teich[0][1] ==
          Catch::Approx(hyperbolic_distance(cplx{0, 0}, cplx{0.3, 0.0})).margin(2.5e-2));

    // the member overload carries the parameter distance along
    EntireFamilyMember m0 = construct_entire(cplx{0, 0}, ex, g);
    EntireFamilyMember m1 = construct_entire(cplx{0.3, 0.0}, ex, g);
    DistanceReport d = teich_distance(m0, m1);
    REQUIRE(d.d_hyperbolic.has_value());
    CHECK(*d.d_hyperbolic == Catch::Approx(hyperbolic_distance(cplx{0, 0}, cplx{0.3, 0.0})));
    CHECK(std::abs(d.d_teich - *d.d_hyperbolic) < 5e-2);
}
