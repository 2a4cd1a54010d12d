// tensionlab: solve the tension equation, construct entire-family members,
// audit map records, tabulate distances, and trace the strip profile.
// Exit codes: 0 success, 1 malformed input or unreadable file, 2 solver did
// not converge (output still written), 3 audit found failing checks.

#include <cctype>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tensionlab/tensionlab.hpp"

namespace tl = tensionlab;

namespace {

std::vector<double> parse_doubles(const std::string& flag, const std::string& s, size_t want) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            tl::fail("bad-parameter", flag + ": '" + item + "' is not a number");
        }
    }
    if (want != 0 && out.size() != want)
        tl::fail("bad-parameter",
                 flag + ": expected " + std::to_string(want) + " comma-separated numbers");
    return out;
}

tl::GridSpec parse_grid(const std::string& s) {
    std::vector<double> v = parse_doubles("--grid", s, 5);
    double nx = v[2], ny = v[3];
    if (nx != int(nx) || ny != int(ny))
        tl::fail("bad-parameter", "--grid: NX and NY must be integers");
    return tl::GridSpec(v[0], v[1], int(nx), int(ny), v[4]);
}

tl::Metric parse_metric(const std::string& metric_name, const std::string& theta_csv) {
    if (!metric_name.empty() && !theta_csv.empty())
        tl::fail("bad-parameter", "--metric and --theta are mutually exclusive");
    if (!metric_name.empty()) return tl::builtin_metric(metric_name);
    if (!theta_csv.empty()) {
        std::vector<double> v = parse_doubles("--theta", theta_csv, 0);
        if (v.empty() || v.size() % 2 != 0)
            tl::fail("bad-parameter", "--theta: expected RE,IM pairs");
        std::vector<tl::cplx> theta;
        for (size_t k = 0; k < v.size(); k += 2) theta.emplace_back(v[k], v[k + 1]);
        return tl::metric_from_theta(theta);
    }
    tl::fail("bad-parameter", "need --metric NAME or --theta COEFFS");
}

// "tanh_strip[:SHIFT]", "linear:RE,IM", "bump[:AMP]", "profile:C,paper|corrected"
tl::json parse_fixture(const std::string& s) {
    std::string name = s, arg;
    if (size_t colon = s.find(':'); colon != std::string::npos) {
        name = s.substr(0, colon);
        arg = s.substr(colon + 1);
    }
    if (name == "tanh_strip")
        return {{"name", name}, {"x_shift", arg.empty() ? 0.0 : std::stod(arg)}};
    if (name == "linear") {
        std::vector<double> v = parse_doubles("--boundary-from", arg.empty() ? "1,0" : arg, 2);
        return {{"name", name}, {"a", {v[0], v[1]}}};
    }
    if (name == "bump") return {{"name", name}, {"amp", arg.empty() ? 0.3 : std::stod(arg)}};
    if (name == "profile") {
        std::string variant = "paper";
        double c = 1.0;
        if (!arg.empty()) {
            std::stringstream ss(arg);
            std::string tok;
            std::getline(ss, tok, ',');
            c = std::stod(tok);
            if (std::getline(ss, tok, ',')) variant = tok;
        }
        return {{"name", name}, {"c", c}, {"variant", variant}};
    }
    tl::fail("unknown-name", "--boundary-from: no fixture named '" + name + "'");
}

int cmd_solve(const std::string& metric_name, const std::string& theta_csv,
              const std::string& grid_csv, const std::string& boundary_file,
              const std::string& boundary_from, double tol, long max_iters,
              const std::string& method, const std::string& out_path) {
    tl::GridSpec g = parse_grid(grid_csv);
    tl::Metric m = parse_metric(metric_name, theta_csv);

    tl::Field boundary(g);
    tl::json fixture;
    if (!boundary_file.empty() && !boundary_from.empty())
        tl::fail("bad-parameter", "--boundary and --boundary-from are mutually exclusive");
    if (!boundary_file.empty()) {
        tl::MapRecord rec = tl::read_map_record(boundary_file);
        if (!rec.f.grid.same_as(g))
            tl::fail("grid-mismatch", "--boundary: record grid differs from --grid");
        boundary = rec.f;
    } else if (!boundary_from.empty()) {
        fixture = parse_fixture(boundary_from);
        boundary = tl::detail::fixture_sample(fixture, g);
    } else {
        tl::fail("bad-parameter", "need --boundary FILE or --boundary-from FIXTURE");
    }

    tl::SolveParams prm;
    prm.tol = tol;
    prm.max_iters = max_iters;
    prm.method = method;
    auto [f, report] = tl::solve_dirichlet(boundary, m, g, prm);

    tl::MapRecord rec;
    rec.f = f;
    rec.metric = m;
    rec.fixture = fixture;
    tl::write_map_record(out_path, rec);

    std::printf("solve: %s after %ld iterations, residual %s\n",
                report.converged ? "converged" : "did-not-converge", report.iterations,
                tl::fmt_double(report.final_residual).c_str());
    return report.converged ? 0 : 2;
}

int cmd_construct(const std::string& alpha_csv, const std::string& metric_name,
                  const std::string& theta_csv, const std::string& grid_csv,
                  const std::string& out_path) {
    std::vector<double> av = parse_doubles("--alpha", alpha_csv, 2);
    tl::GridSpec g = parse_grid(grid_csv);
    tl::Metric m = parse_metric(metric_name, theta_csv);
    tl::EntireFamilyMember member = tl::construct_entire(tl::cplx(av[0], av[1]), m, g);

    tl::MapRecord rec;
    rec.f = member.g; // the stored map solves the coefficient's equation
    rec.metric = m;
    rec.alpha = member.alpha;
    tl::write_map_record(out_path, rec);
    std::printf("construct: alpha=(%s,%s) on %dx%d grid -> %s\n", tl::fmt_double(av[0]).c_str(),
                tl::fmt_double(av[1]).c_str(), g.nx, g.ny, out_path.c_str());
    return 0;
}

int cmd_audit(const std::string& in_path, const std::string& out_path, tl::AuditParams prm) {
    tl::MapRecord rec = tl::read_map_record(in_path);
    tl::AuditReport rep = tl::run_audit(rec, in_path, prm);
    if (!out_path.empty()) tl::write_audit_report(out_path, rep);
    for (const auto& c : rep.checks) {
        std::string line = c.verdict;
        for (auto& ch : line) ch = char(std::toupper((unsigned char)ch));
        std::printf("[%s] %s", line.c_str(), c.name.c_str());
        if (c.residual) std::printf(" residual=%s", tl::fmt_double(*c.residual).c_str());
        if (c.tolerance) std::printf(" tolerance=%s", tl::fmt_double(*c.tolerance).c_str());
        if (c.refinement_ratio)
            std::printf(" ratio=%s", tl::fmt_double(*c.refinement_ratio).c_str());
        std::printf("\n");
    }
    return rep.all_pass() ? 0 : 3;
}

int cmd_distance(const std::string& in_csv, const std::string& out_path) {
    std::vector<std::string> paths;
    {
        std::stringstream ss(in_csv);
        std::string item;
        while (std::getline(ss, item, ',')) paths.push_back(item);
    }
    if (paths.size() < 2) tl::fail("bad-parameter", "--in: need at least two records");
    std::vector<tl::MapRecord> recs;
    for (const auto& p : paths) recs.push_back(tl::read_map_record(p));

    size_t n = recs.size();
    bool all_alpha = true;
    for (const auto& r : recs) all_alpha = all_alpha && r.alpha.has_value();

    std::vector<std::vector<double>> dt(n, std::vector<double>(n, 0.0)), dh;
    if (all_alpha) dh.assign(n, std::vector<double>(n, 0.0));
    double max_disc = 0.0;
    for (size_t p = 0; p < n; ++p)
        for (size_t q = p + 1; q < n; ++q) {
            tl::DistanceReport d = tl::teich_distance(recs[p].f, recs[q].f);
            dt[p][q] = dt[q][p] = d.d_teich;
            if (all_alpha) {
                double dd = tl::hyperbolic_distance(*recs[p].alpha, *recs[q].alpha);
                dh[p][q] = dh[q][p] = dd;
                max_disc = std::max(max_disc, std::abs(d.d_teich - dd));
            }
        }

    std::string csv;
    auto emit_matrix = [&](const char* title, const std::vector<std::vector<double>>& mat) {
        csv += std::string("# ") + title + "\n";
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = 0; q < n; ++q) {
                if (q) csv += ",";
                csv += tl::fmt_double(mat[p][q]);
            }
            csv += "\n";
        }
    };
    emit_matrix("d_teich", dt);
    if (all_alpha) {
        emit_matrix("d_hyperbolic", dh);
        csv += "# max_discrepancy\n" + tl::fmt_double(max_disc) + "\n";
    }
    tl::write_text_file(out_path, csv);
    std::printf("distance: %zu records%s\n", n,
                all_alpha ? (", max discrepancy " + tl::fmt_double(max_disc)).c_str() : "");
    return 0;
}

int cmd_profile(double c, const std::string& variant, const std::string& xrange_csv,
                const std::string& out_path) {
    if (!(c > 0.0)) tl::fail("bad-parameter", "--c: need c > 0");
    if (variant != "paper" && variant != "corrected")
        tl::fail("bad-parameter", "--variant: 'paper' or 'corrected'");
    std::vector<double> xr = parse_doubles("--xrange", xrange_csv, 3);
    double a = xr[0], b = xr[1];
    int npts = int(xr[2]);
    if (npts < 2 || a >= b) tl::fail("bad-parameter", "--xrange: need A < B and N >= 2");

    tl::StripProfileParams p;
    p.c = c;
    p.variant = (variant == "corrected") ? tl::ProfileVariant::corrected
                                         : tl::ProfileVariant::paper;

    std::string csv = "x,mu,uprime,u,twist_residual\n";
    double step = (b - a) / (npts - 1);
    double u = tl::strip_profile_u(a, p);
    double max_twist = 0.0, min_uprime = 1e300;
    for (int k = 0; k < npts; ++k) {
        double x = a + k * step;
        if (k > 0)
            u += tl::detail::adaptive_simpson(
                [&](double t) { return tl::strip_profile_uprime(t, p); }, x - step, x, 1e-12);
        double mu = tl::strip_profile_mu(x, p);
        double up = tl::strip_profile_uprime(x, p);
        double tw = tl::strip_profile_twist_residual(x, p);
        max_twist = std::max(max_twist, tw);
        min_uprime = std::min(min_uprime, up);
        csv += tl::fmt_double(x) + "," + tl::fmt_double(mu) + "," + tl::fmt_double(up) + "," +
               tl::fmt_double(u) + "," + tl::fmt_double(tw) + "\n";
    }

    // audit summary: asymptotic ratios at the range ends, the boundedness
    // certificate, and the twist residual extremes
    double left_ratio = tl::strip_profile_uprime(a, p); // -> 1 as a -> -inf
    double s_exp = (p.variant == tl::ProfileVariant::paper) ? 0.5 : 1.0;
    double right_ratio =
        tl::strip_profile_uprime(b, p) / (std::sqrt(c / 2.0) * std::exp(-s_exp * b));
    double tail = tl::strip_profile_u(40.0, p) - tl::strip_profile_u(20.0, p);
    double tail_bound = 2.0 * std::sqrt(c / 2.0) * std::exp(-10.0);

    std::ostringstream summary;
    summary << "# uprime_left_ratio," << tl::fmt_double(left_ratio) << "\n"
            << "# uprime_right_ratio," << tl::fmt_double(right_ratio) << "\n"
            << "# min_uprime," << tl::fmt_double(min_uprime) << "\n"
            << "# sup_u_tail," << tl::fmt_double(tail) << "\n"
            << "# sup_u_tail_bound," << tl::fmt_double(tail_bound) << "\n"
            << "# max_twist_residual," << tl::fmt_double(max_twist) << "\n";
    csv += summary.str();
    tl::write_text_file(out_path, csv);
    std::fputs(summary.str().c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic maps into flat conformal metrics: solve, construct, audit"};
    app.require_subcommand(1);

    std::string metric_name, theta_csv, grid_csv, boundary_file, boundary_from, out_path;
    std::string in_path, alpha_csv, variant = "paper", xrange_csv = "-20,40,601";
    std::string method = "newton";
    double tol = 1e-10, c_value = 1.0;
    long max_iters = 100000;
    tl::AuditParams audit_prm;

    auto* solve = app.add_subcommand("solve", "solve the tension equation on a rectangle");
    solve->add_option("--metric", metric_name, "builtin metric name");
    solve->add_option("--theta", theta_csv, "coefficient power series RE,IM,...");
    solve->add_option("--grid", grid_csv, "X0,Y0,NX,NY,H")->required();
    solve->add_option("--boundary", boundary_file, "map record supplying Dirichlet data");
    solve->add_option("--boundary-from", boundary_from, "fixture NAME[:ARGS]");
    solve->add_option("--tol", tol, "convergence tolerance");
    solve->add_option("--max-iters", max_iters, "iteration budget");
    solve->add_option("--method", method, "newton or relax");
    solve->add_option("--out", out_path, "output map record")->required();

    auto* construct = app.add_subcommand("construct", "construct an entire-family member");
    construct->add_option("--alpha", alpha_csv, "RE,IM with |alpha| < 1")->required();
    construct->add_option("--metric", metric_name, "builtin metric name");
    construct->add_option("--theta", theta_csv, "coefficient power series RE,IM,...");
    construct->add_option("--grid", grid_csv, "X0,Y0,NX,NY,H")->required();
    construct->add_option("--out", out_path, "output map record")->required();

    auto* audit = app.add_subcommand("audit", "run every applicable check on a map record");
    audit->add_option("--in", in_path, "map record to audit")->required();
    audit->add_option("--out", out_path, "audit report file");
    audit->add_flag("--refine", audit_prm.refine, "recompute on the half-spacing grid");
    audit->add_option("--tol-analytic", audit_prm.tol_analytic, "closed-form identity rows");
    audit->add_option("--tol-injected", audit_prm.tol_injected, "analytic-injection rows");
    audit->add_option("--tol-hopf-deviation", audit_prm.tol_hopf_deviation, "");
    audit->add_option("--tol-companion-match", audit_prm.tol_companion_match, "");
    audit->add_option("--tol-mu-constancy", audit_prm.tol_mu_constancy, "");
    audit->add_option("--tol-scale-map-error", audit_prm.c_map_error, "tolerance = c*h^2");
    audit->add_option("--tol-scale-mu-error", audit_prm.c_mu_error, "tolerance = c*h^2");
    audit->add_option("--tol-scale-tension", audit_prm.c_tension, "tolerance = c*h^2*scale");
    audit->add_option("--tol-scale-holomorphy", audit_prm.c_holomorphy, "tolerance = c*h^2*scale");
    audit->add_option("--tol-scale-lemma", audit_prm.c_lemma, "tolerance = c*h^2");
    audit->add_option("--tol-scale-transport", audit_prm.c_transport, "tolerance = c*h^2");

    auto* distance = app.add_subcommand("distance", "pairwise distance matrices");
    distance->add_option("--in", in_path, "comma-separated record paths")->required();
    distance->add_option("--out", out_path, "output CSV")->required();

    auto* profile = app.add_subcommand("profile", "trace the decaying strip profile");
    profile->add_option("--c", c_value, "profile constant, > 0");
    profile->add_option("--variant", variant, "paper or corrected");
    profile->add_option("--xrange", xrange_csv, "A,B,N");
    profile->add_option("--out", out_path, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed())
            return cmd_solve(metric_name, theta_csv, grid_csv, boundary_file, boundary_from,
                             tol, max_iters, method, out_path);
        if (construct->parsed())
            return cmd_construct(alpha_csv, metric_name, theta_csv, grid_csv, out_path);
        if (audit->parsed()) return cmd_audit(in_path, out_path, audit_prm);
        if (distance->parsed()) return cmd_distance(in_path, out_path);
        if (profile->parsed()) return cmd_profile(c_value, variant, xrange_csv, out_path);
    } catch (const tl::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
