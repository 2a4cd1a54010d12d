#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

#include "catch_amalgamated.hpp"
#include "json.hpp"

#include "tensionlab/audit.hpp"
#include "tensionlab/closed_forms.hpp"
#include "tensionlab/grid.hpp"
#include "tensionlab/io.hpp"
#include "tensionlab/metric.hpp"

using namespace tensionlab;
using nlohmann::json;

namespace {

MapRecord make_record() {
    GridSpec g{0.5, 0.0, 9, 5, 0.25};
    MapRecord rec;
    rec.f = TanhStrip{}.sample_map(g);
    rec.metric = builtin_metric("exp_x");
    rec.fixture = json{{"name", "tanh_strip"}, {"x_shift", 0.0}};
    return rec;
}

} // namespace

TEST_CASE("shortest-round-trip double formatting") {
    for (double x : {1.0 / 3.0, 3.141592653589793, 1e-300, 6.02e23, -0.0, 2.0}) {
        CHECK(std::stod(fmt_double(x)) == x);
    }
}

TEST_CASE("map records survive a serialization round trip bit for bit") {
    MapRecord rec = make_record();
    rec.f.set(3, 2, cplx{1.0 / 3.0, -1e-300}); // awkward values on purpose
    rec.f.mask(5, 1);
    rec.alpha = cplx{0.3, -0.125};

    json j = map_record_to_json(rec);
    MapRecord back = map_record_from_json(j);

    CHECK(back.f.grid.same_as(rec.f.grid));
    REQUIRE(back.alpha.has_value());
    CHECK(back.alpha->real() == 0.3);
    CHECK(back.alpha->imag() == -0.125);
    CHECK(back.fixture == rec.fixture);
    CHECK(back.metric.flat == rec.metric.flat);
    for (int j2 = 0; j2 < rec.f.grid.ny; ++j2)
        for (int i = 0; i < rec.f.grid.nx; ++i) {
            CHECK(back.f.ok(i, j2) == rec.f.ok(i, j2));
            if (rec.f.ok(i, j2)) {
                CHECK(back.f.at(i, j2).real() == rec.f.at(i, j2).real());
                CHECK(back.f.at(i, j2).imag() == rec.f.at(i, j2).imag());
            }
        }

    // serialization is deterministic
    CHECK(map_record_to_json(back).dump() == j.dump());
}

TEST_CASE("map records survive a file round trip") {
    MapRecord rec = make_record();
    std::string path = "io_roundtrip_tmp.json";
    write_map_record(path, rec);
    MapRecord back = read_map_record(path);
    CHECK(back.f.grid.same_as(rec.f.grid));
    CHECK(max_abs(back.f) == max_abs(rec.f));
    std::remove(path.c_str());
}

TEST_CASE("malformed records are rejected with the bad-record code") {
    json good = map_record_to_json(make_record());

    auto expect_bad = [](json j) {
        try {
            map_record_from_json(j);
            FAIL("expected a thrown error");
        } catch (const error& e) {
            CHECK(e.code == "bad-record");
        }
    };

    expect_bad(json::array());
    json v = good;
    v["format_version"] = 2;
    expect_bad(v);
    json w = good;
    w["values"].erase(w["values"].size() - 1);
    expect_bad(w);
    json x = good;
    x["values"][0][0] = "soup";
    expect_bad(x);

    try {
        read_map_record("definitely_not_here.json");
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "bad-record");
    }
}

TEST_CASE("metric coefficients survive serialization") {
    Metric m = metric_from_theta({cplx{1.0, 2.0}, cplx{0.5, 0.0}, cplx{0.0, -0.25}});
    Metric back = metric_from_json(metric_to_json(m));
    for (cplx w : {cplx{0.2, 0.4}, cplx{-1.0, 0.3}, cplx{0.7, -0.5}}) {
        CHECK(std::abs(eval_lambda(back, w) - eval_lambda(m, w)) < 1e-15);
        CHECK(std::abs(eval_log_rho(back, w) - eval_log_rho(m, w)) < 1e-13);
    }
}

TEST_CASE("audit reports serialize with verdicts intact") {
    AuditReport rep;
    rep.map_id = "demo";
    rep.environment = json{{"grid", nullptr}};
    CheckEntry a;
    a.name = "tension";
    a.residual = 1.5e-7;
    a.grid_h = 0.015625;
    a.tolerance = 1e-6;
    a.verdict = "pass";
    CheckEntry b;
    b.name = "log-abs-mu-harmonic";
    b.verdict = "not-applicable";
    rep.checks = {a, b};
    CHECK(rep.all_pass());

    AuditReport back = audit_report_from_json(audit_report_to_json(rep));
    REQUIRE(back.checks.size() == 2);
    CHECK(back.checks[0].name == "tension");
    CHECK(*back.checks[0].residual == 1.5e-7);
    CHECK(back.checks[1].verdict == "not-applicable");
    CHECK(!back.checks[1].residual.has_value());

    back.checks[0].verdict = "fail";
    CHECK(!back.all_pass());
}

TEST_CASE("fixture sampler knows the shipped families and nothing else") {
    GridSpec g{0.5, 0.0, 9, 5, 0.25};
    Field f = detail::fixture_sample(json{{"name", "tanh_strip"}, {"x_shift", 0.0}}, g);
    CHECK(f.at(4, 0) == TanhStrip{}.f(g.node(4, 0)));
    try {
        detail::fixture_sample(json{{"name", "klein_bottle"}}, g);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "unknown-name");
    }
}

TEST_CASE("audit of a sampled strip map passes every judged row") {
    GridSpec g{0.5, 0.0, 65, 33, 1.0 / 32};
    MapRecord rec;
    rec.f = TanhStrip{}.sample_map(g);
    rec.metric = builtin_metric("exp_x");
    rec.fixture = json{{"name", "tanh_strip"}, {"x_shift", 0.0}};

    AuditReport rep = run_audit(rec, "strip");
    CHECK(rep.all_pass());
    bool saw_tension = false, saw_injected = false;
    for (const auto& c : rep.checks) {
        if (c.name == "tension") saw_tension = true;
        if (c.name == "log-abs-mu-harmonic-injected") {
            saw_injected = true;
            CHECK(*c.residual < 1e-12);
        }
    }
    CHECK(saw_tension);
    CHECK(saw_injected);
}

TEST_CASE("audit flags the non-harmonic control") {
    GridSpec g{-1.5, -1.5, 33, 33, 3.0 / 32};
    MapRecord rec;
    rec.f = SyntheticBump{}.sample_map(g);
    rec.metric = builtin_metric("euclid");
    rec.fixture = json{{"name", "bump"}, {"amp", 0.3}};

    AuditReport rep = run_audit(rec, "control");
    CHECK(!rep.all_pass());
    bool tension_failed = false, max_principle_failed = false;
    for (const auto& c : rep.checks) {
        if (c.name == "tension" && c.verdict == "fail") tension_failed = true;
        if (c.name == "max-principle" && c.verdict == "fail") max_principle_failed = true;
    }
    CHECK(tension_failed);
    CHECK(max_principle_failed);
}

TEST_CASE("audit reports conformal rows as not applicable, not failing") {
    GridSpec g{-1.0, -1.0, 33, 33, 1.0 / 16};
    MapRecord rec;
    rec.f = LinearMap{cplx{1.0, 0.0}}.sample_map(g);
    rec.metric = builtin_metric("euclid");
    rec.fixture = json{{"name", "linear"}, {"a", json::array({1.0, 0.0})}};

    AuditReport rep = run_audit(rec, "conformal");
    CHECK(rep.all_pass());
    bool saw_na = false;
    for (const auto& c : rep.checks)
        if (c.name == "log-abs-mu-harmonic") {
            CHECK(c.verdict == "not-applicable");
            saw_na = true;
        }
    CHECK(saw_na);
}

TEST_CASE("audit of a family record measures constant modulus on the inverse") {
    Metric ex = builtin_metric("exp_x");
    int den = 32;
    int nx = (int)std::lround(1.5 * den) + 1;
    GridSpec g{-0.25, -0.75, nx, nx, 1.0 / den};
    EntireFamilyMember mem = construct_entire(cplx{0.3, 0.0}, ex, g);

    MapRecord rec;
    rec.f = mem.g;
    rec.metric = ex;
    rec.alpha = mem.alpha;

    AuditReport rep = run_audit(rec, "member");
    CHECK(rep.all_pass());
    bool saw_constancy = false, saw_inverse = false;
    for (const auto& c : rep.checks) {
        if (c.name == "mu-constancy") saw_constancy = true;
        if (c.name == "inverse-mu-modulus") {
            saw_inverse = true;
            CHECK(*c.residual < 1e-2);
        }
    }
    CHECK(saw_constancy);
    CHECK(saw_inverse);
}

TEST_CASE("refined audit attaches second-order ratios") {
    GridSpec g{0.5, 0.0, 33, 17, 1.0 / 16};
    MapRecord rec;
    rec.f = TanhStrip{}.sample_map(g);
    rec.metric = builtin_metric("exp_x");
    rec.fixture = json{{"name", "tanh_strip"}, {"x_shift", 0.0}};

    AuditParams prm;
    prm.refine = true;
    AuditReport rep = run_audit(rec, "strip", prm);
    bool saw_ratio = false;
    for (const auto& c : rep.checks)
        if (c.name == "tension" && c.refinement_ratio) {
            saw_ratio = true;
            CHECK(*c.refinement_ratio > 3.0);
            CHECK(*c.refinement_ratio < 5.0);
        }
    CHECK(saw_ratio);

    // a bare record has nothing to regenerate from
    MapRecord bare;
    bare.f = rec.f;
    bare.metric = rec.metric;
    try {
        run_audit(bare, "bare", prm);
        FAIL("expected a thrown error");
    } catch (const error& e) {
        CHECK(e.code == "bad-parameter");
    }
}
