#include <gtest/gtest.h>

#include <atomic>

#include "eqcheck/eqcheck.hpp"
#include "eqcheck/fixtures_data.hpp"

using eqcheck::RunConfig;
using eqcheck::Suite;
using eqcheck::Verdict;

namespace {

std::string_view fixture_text(std::string_view name) {
    for (const auto& f : eqcheck::fixtures::kAll)
        if (f.name == name) return f.text;
    throw std::runtime_error("missing fixture");
}

const eqcheck::CheckEntry& find_check(const eqcheck::CheckReport& r, std::string_view id) {
    for (const auto& c : r.checks)
        if (c.id == id) return c;
    throw std::runtime_error("missing check " + std::string(id));
}

RunConfig all_suites() {
    RunConfig cfg;
    cfg.suites = eqcheck::parse_suites("all", &cfg.all);
    return cfg;
}

} // namespace

TEST(Suites, ParseNamesInCanonicalOrder) {
    bool all = true;
    EXPECT_EQ(eqcheck::parse_suites("solitons,curvature", &all), (std::vector<Suite>{Suite::Curvature, Suite::Solitons}));
    EXPECT_FALSE(all);
    EXPECT_EQ(eqcheck::parse_suites("all", &all).size(), 5u);
    EXPECT_TRUE(all);
    EXPECT_THROW(eqcheck::parse_suites("curvature,bogus"), eqcheck::UsageError);
    EXPECT_THROW(eqcheck::parse_suites(""), eqcheck::UsageError);
}

TEST(Parallel, ResultsAreOrderedAndSeedsAreScheduleFree) {
    const auto squares = eqcheck::parallel_map(100, [](std::size_t i) { return i * i; }, 4);
    for (std::size_t i = 0; i < squares.size(); ++i) EXPECT_EQ(squares[i], i * i);
    EXPECT_NE(eqcheck::point_seed(1, 0), eqcheck::point_seed(1, 1));
    EXPECT_NE(eqcheck::point_seed(1, 0), eqcheck::point_seed(2, 0));
    EXPECT_EQ(eqcheck::point_seed(9, 3), eqcheck::point_seed(9, 3));
}

TEST(Parallel, FirstErrorByIndexIsRethrown) {
    std::atomic<int> calls{0};
    try {
        eqcheck::parallel_map(
            20,
            [&](std::size_t i) {
                ++calls;
                if (i == 7 || i == 13) throw std::runtime_error("bad " + std::to_string(i));
                return i;
            },
            3);
        FAIL();
    } catch (const std::runtime_error& e) {
        EXPECT_STREQ(e.what(), "bad 7");
    }
    EXPECT_EQ(calls.load(), 20);
}

TEST(Report, HashIsFnv1a) {
    EXPECT_EQ(eqcheck::content_hash(""), "fnv1a64:cbf29ce484222325");
    EXPECT_EQ(eqcheck::content_hash("a"), "fnv1a64:af63dc4c8601ec8c");
}

TEST(Report, JsonIsIdenticalAcrossThreadCounts) {
    const auto text = fixture_text("paper-example");
    const auto spec = eqcheck::load_manifold(text);
    auto cfg = all_suites();
    cfg.threads = 1;
    const auto one = eqcheck::render_json(eqcheck::run_checks(spec, text, cfg));
    cfg.threads = 4;
    const auto four = eqcheck::render_json(eqcheck::run_checks(spec, text, cfg));
    EXPECT_EQ(one, four);
    const auto j = nlohmann::json::parse(one);
    EXPECT_EQ(j["version"], 1);
    EXPECT_EQ(j["spec"]["hash"], eqcheck::content_hash(text));
    EXPECT_EQ(j["points"].size(), 10u);
}

TEST(Report, WarpedProductComputedModeFailsOnlyTheDeclaredAlgebra) {
    const auto text = fixture_text("paper-example");
    const auto spec = eqcheck::load_manifold(text);
    const auto rep = eqcheck::run_checks(spec, text, all_suites());
    EXPECT_EQ(rep.status(), Verdict::Fail);
    EXPECT_EQ(rep.exit_code(), 1);
    EXPECT_EQ(find_check(rep, "curvature.invariants").verdict, Verdict::Pass);
    EXPECT_EQ(find_check(rep, "eq.orthonormality").verdict, Verdict::Pass);
    EXPECT_EQ(find_check(rep, "eq.decomposition").verdict, Verdict::Fail);
    EXPECT_EQ(find_check(rep, "curvature.discrepancies").verdict, Verdict::Indeterminate);
    for (const auto& c : rep.checks)
        if (c.id.starts_with("soliton.")) {
            EXPECT_EQ(c.verdict, Verdict::Indeterminate) << c.id;
        }
}

TEST(Report, WarpedProductDeclaredModePasses) {
    const auto text = fixture_text("paper-example");
    const auto spec = eqcheck::load_manifold(text);
    RunConfig cfg;
    cfg.suites = {Suite::EqDecomposition};
    cfg.mode = eqcheck::RicciSource::Declared;
    const auto rep = eqcheck::run_checks(spec, text, cfg);
    EXPECT_EQ(rep.status(), Verdict::Pass);
    EXPECT_EQ(find_check(rep, "eq.decomposition").verdict, Verdict::Pass);
}

TEST(Report, DiscrepancyLedgerRecordsSignDisagreements) {
    const auto text = fixture_text("paper-example");
    const auto spec = eqcheck::load_manifold(text);
    RunConfig cfg;
    const auto rep = eqcheck::run_checks(spec, text, cfg);
    const auto dump = nlohmann::json(find_check(rep, "curvature.discrepancies").aggregate).dump();
    EXPECT_NE(dump.find("ricci 1,1"), std::string::npos) << dump;
    EXPECT_NE(dump.find("differs"), std::string::npos) << dump;
    EXPECT_NE(dump.find("agrees"), std::string::npos) << dump;
}

TEST(Report, SolitonSuiteNeedsParametersUnlessRunningAll) {
    const auto text = fixture_text("gaussian-soliton");
    const auto spec = eqcheck::load_manifold(text);
    RunConfig cfg;
    cfg.suites = {Suite::Solitons};
    EXPECT_THROW(eqcheck::run_checks(spec, text, cfg), eqcheck::UsageError);
    cfg.c1 = 0;
    cfg.c2 = 1;
    cfg.lambda = 1;
    cfg.riemann_lambda = 2;
    cfg.field = "P";
    const auto rep = eqcheck::run_checks(spec, text, cfg);
    EXPECT_EQ(rep.status(), Verdict::Pass);
    EXPECT_EQ(find_check(rep, "soliton.grs").verdict, Verdict::Pass);
    EXPECT_EQ(find_check(rep, "soliton.riemann").verdict, Verdict::Pass);
}

TEST(Report, DeclaredModeWithoutDeclaredRicciIsRejected) {
    const auto text = fixture_text("sphere2");
    RunConfig cfg;
    cfg.mode = eqcheck::RicciSource::Declared;
    EXPECT_THROW(eqcheck::run_checks(eqcheck::load_manifold(text), text, cfg), eqcheck::PreconditionError);
}

TEST(Report, EveryFixtureRunsEverySuite) {
    for (const auto& f : eqcheck::fixtures::kAll) {
        SCOPED_TRACE(std::string(f.name));
        const auto spec = eqcheck::load_manifold(f.text);
        EXPECT_NO_THROW({
            const auto rep = eqcheck::run_checks(spec, f.text, all_suites());
            EXPECT_FALSE(rep.checks.empty());
            EXPECT_FALSE(eqcheck::render_text(rep).empty());
        });
    }
}

TEST(Report, TextRenderingListsVerdicts) {
    const auto text = fixture_text("sphere2");
    RunConfig cfg;
    cfg.suites = {Suite::ConstantCurvature};
    const auto out = eqcheck::render_text(eqcheck::run_checks(eqcheck::load_manifold(text), text, cfg));
    EXPECT_NE(out.find("[pass] curvature.constant"), std::string::npos) << out;
    EXPECT_NE(out.find("status: pass"), std::string::npos);
}
