#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "eqcheck/eqcheck.hpp"
#include "eqcheck/fixtures_data.hpp"
#include "oracles.hpp"

using eqcheck::RicciSource;
using eqcheck::Vector;
using eqcheck::build_frame;
using eqcheck::load_manifold;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Accumulates the worst value of a quantity against its bound.
class Bound {
public:
    Bound(std::string name, double limit) : name_(std::move(name)), limit_(limit) {}
    void add(double v) {
        if (std::isnan(v)) nan_ = true;
        worst_ = std::max(worst_, v);
    }
    bool ok() const { return !nan_ && worst_ < limit_; }
    std::string text() const {
        std::ostringstream s;
        s << name_ << " " << worst_ << (ok() ? " < " : " !< ") << limit_;
        return s.str();
    }

private:
    std::string name_;
    double limit_;
    double worst_ = 0.0;
    bool nan_ = false;
};

Outcome combine(std::initializer_list<std::reference_wrapper<const Bound>> bounds, std::string extra = "") {
    Outcome o;
    for (const Bound& b : bounds) {
        o.pass = o.pass && b.ok();
        o.detail += (o.detail.empty() ? "" : "; ") + b.text();
    }
    if (!extra.empty()) o.detail += "; " + extra;
    return o;
}

std::string_view fixture_text(std::string_view name) {
    for (const auto& f : eqcheck::fixtures::kAll)
        if (f.name == name) return f.text;
    throw std::runtime_error("missing bundled fixture " + std::string(name));
}

eqcheck::ManifoldSpec fixture(std::string_view name) { return load_manifold(fixture_text(name)); }

// 1 ------------------------------------------------------------------------
Outcome christoffel_reproduction() {
    const auto s = fixture("paper-example");
    const auto f = build_frame(s, std::vector<double>{1, 2, 0, 0});
    Bound b("max |Gamma - expected|", 1e-12);
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double expected = 0.0;
                auto is = [&](int kk, int ii, int jj) { return k == kk && ((i == ii && j == jj) || (i == jj && j == ii)); };
                if (is(0, 0, 1)) expected = 0.25;
                else if (is(0, 1, 1)) expected = -0.25;
                else if (is(1, 0, 0)) expected = -0.5;
                else if (is(1, 0, 1)) expected = 0.5;
                b.add(std::abs(f.gamma(k, i, j) - expected));
            }
    return combine({b});
}

// 2 ------------------------------------------------------------------------
Outcome curvature_ground_truth() {
    const auto s = fixture("paper-example");
    const std::vector<double> p{1, 2, 0, 0};
    const auto f = build_frame(s, p);
    // Orthogonal 2-D block diag(x2, x1): K = (x1 + x2) / (4 (x1 x2)^2); the flat factor adds nothing.
    const double x1 = p[0], x2 = p[1];
    const double K = (x1 + x2) / (4 * (x1 * x2) * (x1 * x2));
    const double ric11 = K * x2, ric22 = K * x1, r = 2 * K;
    Bound closed("closed form", 1e-9), fd("finite differences", 1e-5), target("target values", 1e-12);
    closed.add(std::abs(f.ricci_computed(0, 0) - ric11));
    closed.add(std::abs(f.ricci_computed(1, 1) - ric22));
    closed.add(std::abs(f.scalar_computed - r));
    target.add(std::abs(ric11 - 0.375));
    target.add(std::abs(ric22 - 0.1875));
    target.add(std::abs(r - 0.375));
    const auto ric_fd = oracle::ricci_fd(s, p);
    const auto ginv = eqcheck::invert(eqcheck::metric_at(s, p)).inverse;
    fd.add(std::abs(f.ricci_computed(0, 0) - ric_fd(0, 0)));
    fd.add(std::abs(f.ricci_computed(1, 1) - ric_fd(1, 1)));
    fd.add(std::abs(f.scalar_computed - eqcheck::trace_with(ginv, ric_fd)));

    eqcheck::RunConfig cfg;
    const auto rep = eqcheck::run_checks(s, fixture_text("paper-example"), cfg);
    bool recorded = false;
    std::string relations;
    for (const auto& c : rep.checks)
        if (c.id == "curvature.discrepancies") {
            const auto& agg = c.aggregate;
            const bool ric = agg.contains("ricci 1,1") && agg["ricci 1,1"]["relation"] != "agrees";
            const bool riem = agg.contains("riemann 1,2,1,2") && agg["riemann 1,2,1,2"]["relation"] != "agrees";
            recorded = ric && riem && c.verdict == eqcheck::Verdict::Indeterminate;
            if (agg.contains("ricci 1,1")) relations += "Ric11 " + agg["ricci 1,1"]["relation"].get<std::string>();
            if (agg.contains("riemann 1,2,1,2"))
                relations += ", R1212 " + agg["riemann 1,2,1,2"]["relation"].get<std::string>();
        }
    auto o = combine({closed, fd, target}, "ledger: " + (relations.empty() ? std::string("missing") : relations));
    o.pass = o.pass && recorded;
    return o;
}

// 3, 4 ----------------------------------------------------------------------
struct DeclaredGrid {
    Bound verified{"max |res(1,1)|, |res(2,2)|", 1e-12};
    Bound third{"max ||res(3,3)| - 1/(x1 x2)|", 1e-12};
    Bound gram{"max Gram residual", 1e-12};
    std::size_t points = 0;
    bool grid_ok = true;
    bool sign_negative = true;
};

DeclaredGrid declared_grid() {
    const auto s = fixture("paper-example");
    DeclaredGrid out;
    for (const auto& p : eqcheck::sample_points(s)) {
        ++out.points;
        out.grid_ok = out.grid_ok && p[0] >= 0.5 && p[0] <= 3 && p[1] >= 0.5 && p[1] <= 3 && p[0] != p[1];
        const auto f = build_frame(s, p, {RicciSource::Declared, false});
        const auto t = eqcheck::triple_at(s, f);
        const auto res = eqcheck::decomposition_residual(f, t, eqcheck::declared_coefficients(s, p)).residual;
        out.verified.add(std::abs(res(0, 0)));
        out.verified.add(std::abs(res(1, 1)));
        out.third.add(std::abs(std::abs(res(2, 2)) - 1.0 / (p[0] * p[1])));
        out.sign_negative = out.sign_negative && res(2, 2) < 0;
        for (double g : eqcheck::gram_residuals(s, *s.generators, p)) out.gram.add(std::abs(g));
    }
    out.grid_ok = out.grid_ok && out.points == 10;
    return out;
}

Outcome declared_algebra(const DeclaredGrid& g) {
    auto o = combine({g.verified, g.third}, std::to_string(g.points) + " grid points; (3,3) residual is Ric - model, sign " +
                                                (g.sign_negative ? "negative" : "mixed"));
    o.pass = o.pass && g.grid_ok;
    return o;
}

Outcome generator_orthonormality(const DeclaredGrid& g) {
    auto o = combine({g.gram}, std::to_string(g.points) + " grid points");
    o.pass = o.pass && g.grid_ok;
    return o;
}

// 5 ------------------------------------------------------------------------
Outcome coefficient_round_trip() {
    std::mt19937_64 rng(20240501);
    Bound coeff("coefficients", 1e-9), decomp("decomposition", 1e-9), r("r - (na + b)", 1e-9), l2("l^2 identity", 1e-9);
    int bound_checked = 0, bound_failed = 0, specs = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + trial % 3;
        const auto syn = oracle::synthetic_eq(rng, n);
        const auto s = load_manifold(syn.json);
        ++specs;
        for (const auto& p : eqcheck::sample_points(s)) {
            const auto f = build_frame(s, p, {RicciSource::Declared, false});
            const auto t = eqcheck::triple_at(s, f);
            const auto k = eqcheck::extract_coefficients(f, t);
            const auto d = eqcheck::declared_coefficients(s, p);
            coeff.add(std::max({std::abs(k.a - d.a), std::abs(k.b - d.b), std::abs(k.c - d.c)}));
            decomp.add(eqcheck::decomposition_residual(f, t, k).max_abs);
            const auto id = eqcheck::scalar_identities(f, k, 1e-6);
            r.add(id.r_residual);
            l2.add(id.l2_residual);
            if (id.bound_checked) {
                ++bound_checked;
                if (!id.bound_holds) ++bound_failed;
            }
        }
    }
    auto o = combine({coeff, decomp, r, l2}, std::to_string(specs) + " specs; 2c^2 < l^2 held at " +
                                                 std::to_string(bound_checked - bound_failed) + "/" + std::to_string(bound_checked) +
                                                 " points with |a| > 1e-6");
    o.pass = o.pass && bound_failed == 0 && bound_checked > 0;
    return o;
}

// 6 ------------------------------------------------------------------------
Outcome constant_curvature() {
    struct Case { const char* name; double k; };
    Bound spread("sectional spread", 1e-9), kerr("|K - expected|", 1e-9), einstein("sphere3 |Ric - 2g|", 1e-9);
    bool corollary = true;
    int planes = 0;
    for (auto [name, k] : {Case{"sphere2", 1.0}, Case{"sphere3", 1.0}, Case{"hyperbolic2", -1.0}}) {
        const auto s = fixture(name);
        const auto pts = eqcheck::sample_points(s);
        const auto rep = eqcheck::constant_curvature_check(s, pts, 100, 7, 1e-9);
        planes += 100 * static_cast<int>(pts.size());
        spread.add(rep.max_isotropy_spread);
        spread.add(rep.cross_point_spread);
        for (const auto& p : rep.points) {
            kerr.add(std::abs(p.min_k - k));
            kerr.add(std::abs(p.max_k - k));
        }
        if (rep.corollary_applicable) corollary = corollary && rep.corollary_holds;
        if (std::string_view(name) == "sphere3")
            for (const auto& p : pts) {
                const auto f = build_frame(s, p);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) einstein.add(std::abs(f.ricci_computed(i, j) - 2 * f.g(i, j)));
            }
    }
    auto o = combine({spread, kerr, einstein}, std::to_string(planes) + " planes; Einstein-implies-isotropic on n = 3: " +
                                                   (corollary ? "holds" : "violated"));
    o.pass = o.pass && corollary;
    return o;
}

// 7 ------------------------------------------------------------------------
Outcome curvature_identities() {
    std::mt19937_64 rng(777);
    Bound sym("Riemann symmetries", 1e-9), bianchi1("first Bianchi", 1e-9), compat("metric compatibility", 1e-10),
        bianchi2("second Bianchi", 1e-7), inv("g g^-1 - I", 1e-12);
    int frames = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 3;
        const auto s = load_manifold(oracle::random_metric_json(rng, n, 2));
        for (const auto& p : eqcheck::sample_points(s)) {
            const auto f = build_frame(s, p, {RicciSource::Computed, true});
            const auto i = eqcheck::frame_invariants(f);
            sym.add(std::max({i.antisymmetry, i.pair_symmetry, i.ricci_symmetry}));
            bianchi1.add(i.first_bianchi);
            compat.add(i.metric_compatibility);
            bianchi2.add(eqcheck::second_bianchi_residual(f));
            inv.add(i.inverse);
            ++frames;
        }
    }
    return combine({sym, bianchi1, compat, bianchi2, inv}, "50 metrics, " + std::to_string(frames) + " points");
}

// 8 ------------------------------------------------------------------------
Outcome soliton_fixtures() {
    Bound grs("GRS residual (c1 = 0, lambda = 1)", 1e-12), riem("Riemann soliton residual (lambda = 2)", 1e-12),
        sphere("sphere2 Riemann soliton residual", 1e-9), trace("trace identity", 1e-12),
        literal("fixture trace vs n (lambda_trace - lambda)", 1e-12), offsol("off-solution trace identity", 1e-12);
    for (const char* name : {"flat-r2", "flat-r3", "flat-r4"}) {
        const auto s = fixture(name);
        for (const auto& p : eqcheck::sample_points(s)) {
            const auto f = build_frame(s, p);
            const auto x = eqcheck::evaluate_vector_field(s, "P", p);
            const eqcheck::SolitonParams sp{0.0, 1.0, 1.0, "P", {}};
            grs.add(eqcheck::grs_residual(f, x, sp).max_abs);
            riem.add(eqcheck::riemann_soliton_residual(f, x, 2.0).max_abs);
            const auto t = eqcheck::grs_trace_identity(f, x, sp);
            trace.add(std::abs(t.identity_gap));
            literal.add(std::abs(t.residual_trace - f.n * (t.lambda_trace - sp.lambda)));
        }
    }
    const auto s2 = fixture("sphere2");
    const auto pts = eqcheck::sample_points(s2);
    const double k = eqcheck::constant_curvature_check(s2, pts, 100, 3, 1e-9).points.front().mean_k;
    for (const auto& p : pts) {
        const auto f = build_frame(s2, p);
        const auto zero = eqcheck::evaluate_vector_field(s2, "zero", p);
        sphere.add(eqcheck::riemann_soliton_residual(f, zero, k).max_abs);
        const auto t = eqcheck::grs_trace_identity(f, zero, {0.0, 1.0, 1.0, "zero", {}});
        trace.add(std::abs(t.identity_gap));
    }
    // Away from solutions the trace of L + 2 c1 X♭⊗X♭ - 2 c2 Ric - 2 lambda g is 2n (lambda_trace - lambda).
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2, 2);
    const auto r3 = fixture("flat-r3");
    const auto s3 = fixture("sphere3");
    for (int trial = 0; trial < 20; ++trial) {
        const auto& s = trial % 2 ? r3 : s3;
        const std::string field = trial % 2 ? "P" : "dphi";
        const auto p = eqcheck::sample_points(s)[static_cast<std::size_t>(trial % 3)];
        const auto f = build_frame(s, p);
        const auto t = eqcheck::grs_trace_identity(f, eqcheck::evaluate_vector_field(s, field, p),
                                                   {u(rng), u(rng), u(rng), field, {}});
        offsol.add(std::abs(t.identity_gap) / std::max(1.0, std::abs(t.residual_trace)));
    }
    std::ostringstream extra;
    extra << "sphere2 lambda = sampled K = " << k;
    return combine({grs, riem, sphere, trace, literal, offsol}, extra.str());
}

// 9 ------------------------------------------------------------------------
Outcome field_detectors() {
    const auto r2 = fixture("flat-r2");
    Bound killing("rotation Killing", 1e-12), parallel("constant field parallel", 1e-12), alpha("|alpha - 1|", 1e-12),
        sphere_killing("d_phi Killing", 1e-12), geodesic("|geodesic - sin cos|", 1e-10);
    bool concurrent = true, is_parallel = true;
    for (const auto& p : eqcheck::sample_points(r2)) {
        killing.add(eqcheck::killing_residual(r2, "rot", p));
        parallel.add(eqcheck::parallel_residual(r2, "e1", p));
        is_parallel = is_parallel && eqcheck::concurrent_fit(r2, "e1", p, 1e-12).parallel;
        const auto c = eqcheck::concurrent_fit(r2, "P", p, 1e-12);
        concurrent = concurrent && c.concurrent;
        alpha.add(std::abs(c.alpha() - 1.0));
    }
    const auto s2 = fixture("sphere2");
    for (const auto& p : eqcheck::sample_points(s2)) sphere_killing.add(eqcheck::killing_residual(s2, "dphi", p));
    const double theta = std::numbers::pi / 4;
    const std::vector<double> q{theta, 0.3};
    const double geo = eqcheck::geodesic_residual(s2, "dphi", q);
    geodesic.add(std::abs(geo - std::sin(theta) * std::cos(theta)));
    std::ostringstream extra;
    extra << "geodesic residual at theta = pi/4: " << geo;
    auto o = combine({killing, parallel, alpha, sphere_killing, geodesic}, extra.str());
    o.pass = o.pass && concurrent && is_parallel && geo > 0.1;
    return o;
}

// 10 -----------------------------------------------------------------------
Outcome jet_correctness() {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> pt(-1, 1);
    Bound o1("order 1", 1e-5), o2("order 2", 1e-4), o3("order 3", 1e-3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 3;
        const auto coords = oracle::coordinate_names(n);
        const auto e = eqcheck::parse_expr(oracle::random_expr(rng, coords, 1 + trial % 6), coords);
        Vector x(static_cast<std::size_t>(n));
        for (auto& c : x) c = pt(rng);
        const auto j = eqcheck::eval_jet(e, x);
        const oracle::Fn f = [&](const Vector& p) { return eqcheck::eval_value(e, p); };
        auto rel = [](double exact, double approx) { return std::abs(exact - approx) / std::max(1.0, std::abs(exact)); };
        for (int a = 0; a < n; ++a) {
            o1.add(rel(j.d(a), oracle::d1(f, x, a)));
            for (int b = a; b < n; ++b) {
                o2.add(rel(j.d(a, b), oracle::d2(f, x, a, b)));
                for (int c = b; c < n; ++c) o3.add(rel(j.d(a, b, c), oracle::d3(f, x, a, b, c)));
            }
        }
    }
    return combine({o1, o2, o3}, "200 expressions; error / max(1, |jet|)");
}

// 11 -----------------------------------------------------------------------
std::pair<int, std::string> capture(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, out};
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome determinism() {
    const std::string cmd = std::string("\"") + EQCHECK_CLI + "\" check \"" + EQCHECK_FIXTURES +
                            "/paper-example.mfd\" --suite all --format json 2>/dev/null";
    const auto [c1, a] = capture(cmd);
    const auto [c2, b] = capture(cmd);
    Outcome o;
    o.pass = !a.empty() && a == b && c1 == c2 && (c1 == 0 || c1 == 1);
    o.detail = std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different") + ", exit codes " +
               std::to_string(c1) + "/" + std::to_string(c2);
    return o;
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    DeclaredGrid grid;
    bool grid_ready = false;
    auto get_grid = [&]() -> const DeclaredGrid& {
        if (!grid_ready) {
            grid = declared_grid();
            grid_ready = true;
        }
        return grid;
    };
    const std::vector<Criterion> criteria{
        {1, "warped product Christoffel symbols at (1,2,0,0)", christoffel_reproduction},
        {2, "warped product Ricci and scalar curvature", curvature_ground_truth},
        {3, "declared-Ricci decomposition on the 10-point grid", [&] { return declared_algebra(get_grid()); }},
        {4, "generator orthonormality on the grid", [&] { return generator_orthonormality(get_grid()); }},
        {5, "coefficient round-trip on 100 synthetic specs", coefficient_round_trip},
        {6, "constant curvature spheres and hyperbolic plane", constant_curvature},
        {7, "curvature identities on 50 random metrics", curvature_identities},
        {8, "soliton fixtures and trace identity", soliton_fixtures},
        {9, "field-property detectors", field_detectors},
        {10, "jets against finite differences", jet_correctness},
        {11, "byte-identical JSON across runs", determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << "  [" << o.detail
                  << "]\n";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << " in " << secs
              << " s\n";
    return failed ? 1 : 0;
}
