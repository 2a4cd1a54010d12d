#ifndef TENSIONLAB_IO_HPP
#define TENSIONLAB_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "grid.hpp"
#include "metric.hpp"

// File formats. Map records and audit reports are JSON (sorted keys, compact,
// shortest round-trip doubles, so identical data gives identical bytes);
// tabular output is CSV. A record stores grid + metric + values row-major
// j-then-i as [re, im] pairs, an optional mask (true = masked), an optional
// family parameter alpha, and an optional fixture descriptor naming the
// closed form it was sampled from (what lets an audit re-run itself on a
// refined grid, or inject analytic fields next to the sampled ones).

namespace tensionlab {

using json = nlohmann::json;

// Shortest decimal that parses back to the same double.
inline std::string fmt_double(double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("bad-record", "cannot open '" + path + "' for writing");
    out << content;
    if (!out) fail("bad-record", "short write to '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("bad-record", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

inline json metric_to_json(const Metric& m) {
    if (m.id == "theta") {
        json coeffs = json::array();
        for (size_t k = 1; k < m.H.size(); ++k) {
            cplx t = m.H[k] * double(k) / 2.0; // invert the antiderivative
            coeffs.push_back({t.real(), t.imag()});
        }
        return {{"kind", "theta"}, {"theta", coeffs}};
    }
    return {{"kind", "builtin"}, {"name", m.id}};
}

inline Metric metric_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        fail("bad-record", "metric descriptor needs a 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "builtin") return builtin_metric(j.at("name").get<std::string>());
    if (kind == "theta") {
        std::vector<cplx> theta;
        for (const auto& t : j.at("theta"))
            theta.emplace_back(t.at(0).get<double>(), t.at(1).get<double>());
        return metric_from_theta(theta);
    }
    fail("bad-record", "unknown metric kind '" + kind + "'");
}

inline json grid_to_json(const GridSpec& g) {
    return {{"x0", g.x0}, {"y0", g.y0}, {"nx", g.nx}, {"ny", g.ny}, {"h", g.h}};
}

inline GridSpec grid_from_json(const json& j) {
    return GridSpec(j.at("x0").get<double>(), j.at("y0").get<double>(),
                    j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("h").get<double>());
}

// ---------------------------------------------------------------------------

struct MapRecord {
    Field f;
    Metric metric;
    std::optional<cplx> alpha;
    json fixture; // descriptor of the generating closed form, or null
};

inline json map_record_to_json(const MapRecord& rec) {
    json j;
    j["format_version"] = 1;
    j["grid"] = grid_to_json(rec.f.grid);
    j["metric"] = metric_to_json(rec.metric);
    if (rec.alpha) j["alpha"] = {rec.alpha->real(), rec.alpha->imag()};
    if (!rec.fixture.is_null()) j["fixture"] = rec.fixture;

    json values = json::array();
    bool any_masked = false;
    for (int k = 0; k < rec.f.grid.count(); ++k) {
        // masked entries are canonicalized to zero: their payload is void
        cplx v = rec.f.valid[k] ? rec.f.v[k] : cplx(0.0);
        values.push_back({v.real(), v.imag()});
        if (!rec.f.valid[k]) any_masked = true;
    }
    j["values"] = std::move(values);
    if (any_masked) {
        json mask = json::array();
        for (int k = 0; k < rec.f.grid.count(); ++k) mask.push_back(rec.f.valid[k] == 0);
        j["mask"] = std::move(mask);
    }
    return j;
}

inline MapRecord map_record_from_json(const json& j) {
    if (!j.is_object()) fail("bad-record", "map record must be a JSON object");
    if (!j.contains("format_version") || j.at("format_version") != 1)
        fail("bad-record", "unrecognized format_version");
    MapRecord rec;
    rec.f = Field(grid_from_json(j.at("grid")));
    rec.metric = metric_from_json(j.at("metric"));
    if (j.contains("alpha"))
        rec.alpha = cplx(j.at("alpha").at(0).get<double>(), j.at("alpha").at(1).get<double>());
    if (j.contains("fixture")) rec.fixture = j.at("fixture");

    const json& values = j.at("values");
    int n = rec.f.grid.count();
    if (!values.is_array() || int(values.size()) != n)
        fail("bad-record", "values length must be nx*ny = " + std::to_string(n));
    if (j.contains("mask")) {
        const json& mask = j.at("mask");
        if (!mask.is_array() || int(mask.size()) != n)
            fail("bad-record", "mask length must be nx*ny");
        for (int k = 0; k < n; ++k) rec.f.valid[k] = mask.at(k).get<bool>() ? 0 : 1;
    }
    for (int k = 0; k < n; ++k) {
        double re = values.at(k).at(0).get<double>(), im = values.at(k).at(1).get<double>();
        if (rec.f.valid[k] && !(std::isfinite(re) && std::isfinite(im)))
            fail("bad-record", "non-finite value at unmasked node " + std::to_string(k));
        rec.f.v[k] = cplx(re, im);
    }
    return rec;
}

inline void write_map_record(const std::string& path, const MapRecord& rec) {
    write_text_file(path, map_record_to_json(rec).dump() + "\n");
}

inline MapRecord read_map_record(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail("bad-record", std::string("cannot parse '") + path + "': " + e.what());
    }
    try {
        return map_record_from_json(j);
    } catch (const json::exception& e) {
        fail("bad-record", std::string("malformed record '") + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------

struct CheckEntry {
    std::string name;
    std::optional<double> residual;  // absent when not applicable
    double grid_h = 0.0;
    std::optional<double> refinement_ratio;
    std::optional<double> tolerance; // absent on info-only rows
    std::string verdict;             // pass | fail | not-applicable | info
};

struct AuditReport {
    std::string map_id;
    json environment;
    std::vector<CheckEntry> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (c.verdict == "fail") return false;
        return true;
    }
};

inline json audit_report_to_json(const AuditReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks) {
        json e;
        e["name"] = c.name;
        if (c.residual) e["residual"] = *c.residual;
        e["grid_h"] = c.grid_h;
        if (c.refinement_ratio) e["refinement_ratio"] = *c.refinement_ratio;
        if (c.tolerance) e["tolerance"] = *c.tolerance;
        e["verdict"] = c.verdict;
        checks.push_back(std::move(e));
    }
    return {{"map", rep.map_id}, {"environment", rep.environment}, {"checks", checks}};
}

inline AuditReport audit_report_from_json(const json& j) {
    AuditReport rep;
    rep.map_id = j.at("map").get<std::string>();
    rep.environment = j.at("environment");
    for (const auto& e : j.at("checks")) {
        CheckEntry c;
        c.name = e.at("name").get<std::string>();
        if (e.contains("residual")) c.residual = e.at("residual").get<double>();
        c.grid_h = e.at("grid_h").get<double>();
        if (e.contains("refinement_ratio"))
            c.refinement_ratio = e.at("refinement_ratio").get<double>();
        if (e.contains("tolerance")) c.tolerance = e.at("tolerance").get<double>();
        c.verdict = e.at("verdict").get<std::string>();
        rep.checks.push_back(std::move(c));
    }
    return rep;
}

inline void write_audit_report(const std::string& path, const AuditReport& rep) {
    write_text_file(path, audit_report_to_json(rep).dump(2) + "\n");
}

} // namespace tensionlab

#endif
