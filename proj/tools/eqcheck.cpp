#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "eqcheck/eqcheck.hpp"
#include "eqcheck/fixtures_data.hpp"

namespace {

struct Source {
    std::string text;
    std::string origin;
};

/// Reads `arg` from disk, or falls back to the bundled fixture with the same stem.
Source resolve_input(const std::string& arg) {
    namespace fs = std::filesystem;
    if (fs::exists(arg)) {
        std::ifstream in(arg, std::ios::binary);
        if (!in) throw eqcheck::UsageError("cannot read '" + arg + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return {ss.str(), arg};
    }
    const std::string stem = fs::path(arg).stem().string();
    for (const auto& f : eqcheck::fixtures::kAll)
        if (f.name == stem) return {std::string(f.text), "bundled:" + stem};
    throw eqcheck::UsageError("no such file or bundled fixture: '" + arg + "'");
}

void emit(const std::string& body, const std::string& out) {
    if (out.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw eqcheck::UsageError("cannot write '" + out + "'");
    f << body;
}

eqcheck::RicciSource parse_mode(const std::string& m) {
    if (m == "computed") return eqcheck::RicciSource::Computed;
    if (m == "declared-ricci") return eqcheck::RicciSource::Declared;
    throw eqcheck::UsageError("unknown mode '" + m + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Checks Einstein-family decompositions, field properties and soliton equations on coordinate charts"};
    app.set_version_flag("--version", std::string(eqcheck::kToolVersion));
    app.require_subcommand(1);

    std::string file, suites = "all", mode = "computed", format = "text", out;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int planes = 100;
    unsigned threads = 0;
    std::optional<double> c1, c2, lambda, riemann_lambda, a1, a2;
    std::optional<std::string> field;

    auto* check = app.add_subcommand("check", "Run check suites over a manifold's sample points");
    check->add_option("file", file, "Manifold file or bundled fixture name")->required();
    check->add_option("--suite", suites, "curvature, eq-decomposition, field-properties, solitons, constant-curvature, all")
        ->capture_default_str();
    check->add_option("--mode", mode, "computed | declared-ricci")->capture_default_str();
    check->add_option("--tol", tol, "Verdict tolerance")->capture_default_str();
    check->add_option("--seed", seed, "Seed for random planes and tuples")->capture_default_str();
    check->add_option("--format", format, "text | json")->capture_default_str();
    check->add_option("--out", out, "Write the report here instead of stdout");
    check->add_option("--c1", c1, "Generalized soliton coefficient c1");
    check->add_option("--c2", c2, "Generalized soliton coefficient c2");
    check->add_option("--lambda", lambda, "Generalized soliton lambda (fitted from the trace when omitted)");
    check->add_option("--riemann-lambda", riemann_lambda, "Riemann soliton lambda (least-squares fit when omitted)");
    check->add_option("--field", field, "Soliton vector field");
    check->add_option("--a1", a1, "Existence relation scalar a1");
    check->add_option("--a2", a2, "Existence relation scalar a2");
    check->add_option("--planes", planes, "Random planes per point for the constant-curvature suite")->capture_default_str();
    check->add_option("--threads", threads, "Worker threads (0 = hardware)");

    auto* curv = app.add_subcommand("curvature", "Print Christoffel, Riemann and Ricci tables");
    curv->add_option("file", file, "Manifold file or bundled fixture name")->required();
    curv->add_option("--format", format, "text | json")->capture_default_str();
    curv->add_option("--out", out, "Write the report here instead of stdout");
    curv->add_option("--tol", tol, "Verdict tolerance")->capture_default_str();

    std::string show_name;
    auto* fx = app.add_subcommand("fixtures", "List bundled fixtures");
    auto* show = fx->add_subcommand("show", "Print a bundled fixture");
    show->add_option("name", show_name, "Fixture name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fx->parsed()) {
            if (show->parsed()) {
                for (const auto& f : eqcheck::fixtures::kAll)
                    if (f.name == show_name) {
                        std::cout << f.text;
                        return 0;
                    }
                throw eqcheck::UsageError("no bundled fixture named '" + show_name + "'");
            }
            for (const auto& f : eqcheck::fixtures::kAll) {
                const auto spec = eqcheck::load_manifold(f.text);
                std::string coords;
                for (const auto& c : spec.coordinates) coords += (coords.empty() ? "" : ", ") + c;
                std::cout << f.name << "\tn=" << spec.dimension << "\t(" << coords << ")"
                          << (spec.declared_ricci ? "\tdeclared Ricci" : "") << "\n";
            }
            return 0;
        }

        if (format != "text" && format != "json") throw eqcheck::UsageError("unknown format '" + format + "'");
        const Source src = resolve_input(file);
        const auto spec = eqcheck::load_manifold(src.text);

        eqcheck::RunConfig cfg;
        cfg.tol = tol;
        cfg.threads = threads;
        if (check->parsed()) {
            cfg.suites = eqcheck::parse_suites(suites, &cfg.all);
            cfg.mode = parse_mode(mode);
            cfg.seed = seed;
            cfg.planes = planes;
            cfg.c1 = c1;
            cfg.c2 = c2;
            cfg.lambda = lambda;
            cfg.riemann_lambda = riemann_lambda;
            cfg.field = field;
            cfg.a1 = a1;
            cfg.a2 = a2;
        } else {
            cfg.suites = {eqcheck::Suite::Curvature};
        }

        const auto report = eqcheck::run_checks(spec, src.text, cfg);
        emit(format == "json" ? eqcheck::render_json(report) : eqcheck::render_text(report), out);
        return report.exit_code();
    } catch (const eqcheck::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
