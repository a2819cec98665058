#include <gtest/gtest.h>

#include <random>

#include "eqcheck/fixtures_data.hpp"
#include "eqcheck/manifold.hpp"
#include "oracles.hpp"

using eqcheck::SchemaError;
using eqcheck::load_manifold;

namespace {

std::string with(const std::string& extra, const std::string& metric = R"({"1,1": "1", "2,2": "1"})",
                 const std::string& samples = R"({"points": [[0.5, 0.5]]})") {
    return R"({"name": "t", "dimension": 2, "coordinates": ["x", "y"], "metric": )" + metric + R"(, "samples": )" +
           samples + extra + "}";
}

std::string schema_path(const std::string& doc) {
    try {
        load_manifold(doc);
    } catch (const SchemaError& e) {
        return e.path();
    }
    ADD_FAILURE() << "document loaded without a schema error:\n" << doc;
    return "<loaded>";
}

} // namespace

TEST(ManifoldLoad, EveryBundledFixtureLoadsAndRoundTrips) {
    ASSERT_GE(eqcheck::fixtures::kAll.size(), 10u);
    for (const auto& f : eqcheck::fixtures::kAll) {
        SCOPED_TRACE(std::string(f.name));
        const auto a = load_manifold(f.text);
        EXPECT_EQ(a.name, f.name);
        const std::string once = eqcheck::serialize_manifold(a);
        const auto b = load_manifold(once);
        EXPECT_EQ(eqcheck::serialize_manifold(b), once);
        EXPECT_EQ(a.dimension, b.dimension);
        EXPECT_EQ(a.coordinates, b.coordinates);
        for (int i = 0; i < a.dimension; ++i)
            for (int j = 0; j < a.dimension; ++j) EXPECT_TRUE(a.metric(i, j) == b.metric(i, j));
        EXPECT_EQ(eqcheck::sample_points(a), eqcheck::sample_points(b));
        EXPECT_EQ(a.discrepancies.size(), b.discrepancies.size());
        EXPECT_EQ(a.verify_components, b.verify_components);
    }
}

TEST(ManifoldLoad, RandomMetricsRoundTrip) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = load_manifold(oracle::random_metric_json(rng, 2 + trial % 3));
        const auto b = load_manifold(eqcheck::serialize_manifold(a));
        for (const auto& p : eqcheck::sample_points(a)) EXPECT_EQ(eqcheck::metric_at(a, p), eqcheck::metric_at(b, p));
    }
}

TEST(ManifoldLoad, MirrorEntriesFillTheSymmetricPart) {
    const auto s = load_manifold(with("", R"({"1,1": "1", "1,2": "0.25*x", "2,2": "2"})"));
    const auto g = eqcheck::metric_at(s, std::vector<double>{2.0, 0.0});
    EXPECT_DOUBLE_EQ(g(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(g(1, 0), 0.5);
    EXPECT_NO_THROW(load_manifold(with("", R"({"1,1": "1", "1,2": "x/4", "2,1": "x/4", "2,2": "2"})")));
}

TEST(ManifoldLoad, GridOrderIsLexicographicFirstCoordinateSlowest) {
    const auto s = load_manifold(with("", R"({"1,1": "1", "2,2": "1"})",
                                      R"({"grid": {"x": {"min": 0, "max": 1, "count": 2}, "y": {"min": 0, "max": 2, "count": 3}}})"));
    const auto pts = eqcheck::sample_points(s);
    ASSERT_EQ(pts.size(), 6u);
    EXPECT_EQ(pts[0], (eqcheck::Vector{0, 0}));
    EXPECT_EQ(pts[1], (eqcheck::Vector{0, 1}));
    EXPECT_EQ(pts[3], (eqcheck::Vector{1, 0}));
    EXPECT_EQ(pts[5], (eqcheck::Vector{1, 2}));
}

TEST(ManifoldLoad, ConstantExpressionsAreAcceptedAsPointCoordinates) {
    const auto s = load_manifold(with("", R"({"1,1": "1", "2,2": "sin(x)^2"})", R"({"points": [["pi/2", "pi/4"]]})"));
    EXPECT_DOUBLE_EQ(eqcheck::sample_points(s)[0][0], std::numbers::pi / 2);
}

TEST(ManifoldSchema, ErrorsNameTheOffendingField) {
    EXPECT_EQ(schema_path("[1, 2]"), "");
    EXPECT_EQ(schema_path("{not json"), "");
    EXPECT_EQ(schema_path(R"({"name": "t", "dimension": 2})"), "");
    EXPECT_EQ(schema_path(R"({"name": "t", "dimension": 9, "coordinates": [], "metric": {}, "samples": {}})"), "dimension");
    EXPECT_EQ(schema_path(with(R"(, "colour": "blue")")), "");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "2,3": "1", "2,2": "1"})")), "metric[2,3]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "2,2": "z"})")), "metric[2,2]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "1,2": "x", "2,1": "y", "2,2": "1"})")), "metric[2,1]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "2,2": 3})")), "metric[2,2]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "2,2": "1"})", R"({"points": [[1, 2, 3]]})")), "samples.points[0]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "2,2": "1"})", R"({"points": []})")), "samples");
    EXPECT_EQ(schema_path(with(R"(, "generators": {"fields": ["U", "V", "W"]})")), "generators.fields");
    EXPECT_EQ(schema_path(with(R"(, "version": 7)")), "version");
    EXPECT_EQ(schema_path(with(R"(, "vector_fields": {"U": ["1"]})")), "vector_fields.U");
}

TEST(ManifoldSchema, NonPositiveDefiniteMetricIsRejected) {
    EXPECT_EQ(schema_path(with("", R"({"1,1": "-1", "2,2": "1"})")), "metric");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1", "1,2": "1", "2,2": "1"})")), "metric");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "x", "2,2": "1"})", R"({"points": [[1, 0], [-1, 0]]})")), "metric");
}

TEST(ManifoldSchema, DomainViolationsNameThePoint) {
    try {
        load_manifold(with(R"(, "domain": ["x - 1"])", R"({"1,1": "1", "2,2": "1"})", R"({"points": [[2, 0], [0.5, 0]]})"));
        FAIL() << "expected a domain violation";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.path(), "domain[0]");
        EXPECT_NE(std::string(e.what()).find("point #1"), std::string::npos) << e.what();
    }
    EXPECT_EQ(schema_path(with(R"J(, "domain": ["log(x)"])J", R"({"1,1": "1", "2,2": "1"})", R"({"points": [[-1, 0]]})")),
              "domain[0]");
    EXPECT_EQ(schema_path(with("", R"({"1,1": "1/x", "2,2": "1"})", R"({"points": [[0, 0]]})")), "metric");
}

TEST(ManifoldSchema, NonOrthonormalGeneratorsOnlyWarn) {
    const auto s = load_manifold(with(R"(, "vector_fields": {"U": ["2", "0"], "V": ["0", "1"], "T": ["0", "1"]},
                                          "generators": {"fields": ["U", "V", "T"]})"));
    EXPECT_FALSE(s.warnings.empty());
}

TEST(ManifoldFields, UnknownNamesThrowPreconditionErrors) {
    const auto s = load_manifold(with(""));
    EXPECT_THROW(eqcheck::find_vector_field(s, "U"), eqcheck::PreconditionError);
    EXPECT_THROW(eqcheck::find_one_form(s, "A"), eqcheck::PreconditionError);
}
