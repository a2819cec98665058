#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string("\"") + EQCHECK_CLI + "\" " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string fixture(const std::string& name) { return std::string("\"") + EQCHECK_FIXTURES + "/" + name + ".mfd\""; }

} // namespace

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("check " + fixture("flat-r4") + " --suite curvature").code, 0);
    EXPECT_EQ(run("check " + fixture("paper-example") + " --suite eq-decomposition").code, 1);
    EXPECT_EQ(run("check " + fixture("paper-example") + " --suite eq-decomposition --mode declared-ricci").code, 0);
    EXPECT_EQ(run("check " + fixture("flat-r4") + " --suite nonsense").code, 2);
    EXPECT_EQ(run("check " + fixture("flat-r4") + " --format yaml").code, 2);
    EXPECT_EQ(run("check /no/such/file.mfd").code, 2);
    EXPECT_EQ(run("check " + fixture("flat-r4") + " --suite solitons").code, 2);
    EXPECT_EQ(run("check " + fixture("sphere2") + " --mode declared-ricci").code, 2);
    EXPECT_EQ(run("--bogus-flag").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, FixturesAreListedSortedAndShowable) {
    const auto r = run("fixtures");
    ASSERT_EQ(r.code, 0);
    std::vector<std::string> names;
    std::size_t pos = 0;
    while (pos < r.out.size()) {
        const auto end = r.out.find('\n', pos);
        const auto line = r.out.substr(pos, end - pos);
        names.push_back(line.substr(0, line.find('\t')));
        pos = end + 1;
    }
    EXPECT_GE(names.size(), 10u);
    EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
    const auto show = run("fixtures show sphere2");
    EXPECT_EQ(show.code, 0);
    EXPECT_NE(show.out.find("\"sphere2\""), std::string::npos);
    EXPECT_EQ(run("fixtures show no-such").code, 2);
}

TEST(Cli, BundledFixturesResolveByName) {
    const auto r = run("check sphere3 --suite constant-curvature --format json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["spec"]["name"], "sphere3");
    EXPECT_EQ(j["status"], "pass");
}

TEST(Cli, JsonOutputIsByteIdenticalAcrossRuns) {
    const std::string args = "check " + fixture("paper-example") + " --suite all --format json";
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 1);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.out.empty());
    EXPECT_TRUE(nlohmann::json::accept(a.out));
}

TEST(Cli, OutFileMatchesStdout) {
    const auto path = std::filesystem::temp_directory_path() / "eqcheck_cli_out_test.json";
    const std::string args = "check " + fixture("sphere2") + " --suite curvature --format json";
    const auto direct = run(args);
    const auto to_file = run(args + " --out \"" + path.string() + "\"");
    EXPECT_EQ(to_file.code, direct.code);
    EXPECT_TRUE(to_file.out.empty());
    std::ifstream in(path, std::ios::binary);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(body, direct.out);
    std::filesystem::remove(path);
}

TEST(Cli, CurvatureSubcommand) {
    const auto r = run("curvature " + fixture("sphere2"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("curvature.christoffel"), std::string::npos);
}

TEST(Cli, SolitonRunWithParameters) {
    const auto r = run("check " + fixture("gaussian-soliton") +
                       " --suite solitons --c1 0 --c2 1 --lambda 1 --field P --riemann-lambda 2 --format json");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["status"], "pass");
}
