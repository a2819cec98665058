#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqcheck/error.hpp"
#include "eqcheck/expr.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

inline constexpr int kManifoldSchemaVersion = 1;

struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    int count = 1;
};

struct SampleSpec {
    bool is_grid = false;
    std::vector<Vector> points;   // explicit list
    std::vector<GridAxis> grid;   // one axis per coordinate, in coordinate order
};

/// Names of the three generators U, V, T and, optionally, the 1-forms A, B, D the
/// file lists for them. The forms used by every check are always g-lowered U, V, T.
struct GeneratorTriple {
    std::string u, v, t;
    std::optional<std::array<std::string, 3>> forms;
};

/// A reference value printed elsewhere that the report compares
/// against the engine's own number, without turning a mismatch into a failure.
struct Discrepancy {
    std::string quantity;          // christoffel | riemann | ricci | scalar_curvature | scalar
    std::vector<int> component;    // 0-based indices; empty for scalar quantities
    std::string scalar;            // scalar name when quantity == "scalar"
    ScalarExpr printed;
    std::string note;
};

struct ManifoldSpec {
    std::string name;
    int dimension = 0;
    std::vector<std::string> coordinates;
    Tensor<2, ScalarExpr> metric;
    std::optional<Tensor<2, ScalarExpr>> declared_ricci;
    std::map<std::string, std::vector<ScalarExpr>> vector_fields;
    std::map<std::string, std::vector<ScalarExpr>> one_forms;
    std::map<std::string, ScalarExpr> scalars;
    std::vector<ScalarExpr> domain;
    SampleSpec samples;
    std::optional<GeneratorTriple> generators;
    double orthonormality_tolerance = 1e-9;
    std::vector<std::pair<int, int>> verify_components;  // 0-based, i <= j
    std::vector<Discrepancy> discrepancies;
    std::vector<std::string> warnings;  // produced by the loader, not serialized

    std::string expr_text(const ScalarExpr& e) const { return e.to_string(coordinates); }
};

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path, "missing required field '" + key + "'");
    return *it;
}

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw SchemaError(path, "unknown key '" + it.key() + "'");
    }
}

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline ScalarExpr parse_field(const json& v, const std::vector<std::string>& coords, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected an expression string");
    try {
        return parse_expr(v.get<std::string>(), std::span<const std::string>(coords));
    } catch (const ParseError& e) {
        throw SchemaError(path, e.what());
    }
}

/// "i,j[,k...]" with 1-based indices.
inline std::vector<int> parse_component(const std::string& key, int n, std::size_t rank, const std::string& path) {
    std::vector<int> out;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
            if (v < 1 || v > n) throw SchemaError(path, "index " + part + " out of range 1.." + std::to_string(n));
            out.push_back(v - 1);
        } catch (const std::logic_error&) {
            throw SchemaError(path, "malformed component key '" + key + "'");
        }
    }
    if (out.size() != rank)
        throw SchemaError(path, "component key '" + key + "' must have " + std::to_string(rank) + " indices");
    return out;
}

inline Tensor<2, ScalarExpr> parse_symmetric(const json& obj, const std::vector<std::string>& coords, const std::string& path) {
    if (!obj.is_object()) throw SchemaError(path, "expected a map of \"i,j\" -> expression");
    const int n = static_cast<int>(coords.size());
    Tensor<2, ScalarExpr> m(n, ScalarExpr(n));
    std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string p = path + "[" + it.key() + "]";
        const auto idx = parse_component(it.key(), n, 2, p);
        const ScalarExpr e = parse_field(it.value(), coords, p);
        const int i = idx[0], j = idx[1];
        const std::size_t mirror = static_cast<std::size_t>(j * n + i);
        if (seen[mirror] && !(m(j, i) == e))
            throw SchemaError(p, "not symmetric: differs from entry " + std::to_string(j + 1) + "," + std::to_string(i + 1));
        m(i, j) = e;
        m(j, i) = e;
        seen[static_cast<std::size_t>(i * n + j)] = 1;
        seen[mirror] = 1;
    }
    return m;
}

inline std::vector<ScalarExpr> parse_components(const json& arr, const std::vector<std::string>& coords, const std::string& path) {
    if (!arr.is_array() || arr.size() != coords.size())
        throw SchemaError(path, "expected an array of " + std::to_string(coords.size()) + " expressions");
    std::vector<ScalarExpr> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_field(arr[i], coords, path + "[" + std::to_string(i) + "]"));
    return out;
}

inline double parse_number(const json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        std::vector<std::string> none;
        try {
            const auto e = parse_expr(v.get<std::string>(), std::span<const std::string>(none));
            return eval_value(e, {});
        } catch (const Error& e) {
            throw SchemaError(path, std::string("not a constant: ") + e.what());
        }
    }
    throw SchemaError(path, "expected a number or constant expression");
}

inline std::string component_key(std::span<const int> idx) {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(idx[k] + 1);
    }
    return s;
}

} // namespace detail

/// Metric component values at a point.
inline Matrix metric_at(const ManifoldSpec& spec, std::span<const double> point) {
    const int n = spec.dimension;
    Matrix g(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = eval_value(spec.metric(i, j), point);
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

inline Vector eval_components(const std::vector<ScalarExpr>& comps, std::span<const double> point) {
    Vector out;
    out.reserve(comps.size());
    for (const auto& c : comps) out.push_back(eval_value(c, point));
    return out;
}

inline const std::vector<ScalarExpr>& find_vector_field(const ManifoldSpec& spec, const std::string& name) {
    auto it = spec.vector_fields.find(name);
    if (it == spec.vector_fields.end()) throw PreconditionError("unknown vector field '" + name + "'");
    return it->second;
}

inline const std::vector<ScalarExpr>& find_one_form(const ManifoldSpec& spec, const std::string& name) {
    auto it = spec.one_forms.find(name);
    if (it == spec.one_forms.end()) throw PreconditionError("unknown 1-form '" + name + "'");
    return it->second;
}

/// The six Gram conditions g(U,U)=g(V,V)=g(T,T)=1, g(U,V)=g(U,T)=g(V,T)=0 as |g(.,.) - delta|,
/// in that order.
inline std::array<double, 6> gram_residuals(const ManifoldSpec& spec, const GeneratorTriple& triple,
                                            std::span<const double> point) {
    const Matrix g = metric_at(spec, point);
    const Vector u = eval_components(find_vector_field(spec, triple.u), point);
    const Vector v = eval_components(find_vector_field(spec, triple.v), point);
    const Vector t = eval_components(find_vector_field(spec, triple.t), point);
    return {std::abs(bilinear(g, u, u) - 1.0), std::abs(bilinear(g, v, v) - 1.0),
            std::abs(bilinear(g, t, t) - 1.0), std::abs(bilinear(g, u, v)),
            std::abs(bilinear(g, u, t)),       std::abs(bilinear(g, v, t))};
}

inline double orthonormality_residual(const ManifoldSpec& spec, const GeneratorTriple& triple,
                                      std::span<const double> point) {
    const auto r = gram_residuals(spec, triple, point);
    double m = 0.0;
    for (double x : r) m = std::max(m, x);
    return m;
}

namespace detail {

inline std::vector<Vector> enumerate_samples(const ManifoldSpec& spec) {
    if (!spec.samples.is_grid) return spec.samples.points;
    std::vector<Vector> out;
    const auto& axes = spec.samples.grid;
    std::size_t total = 1;
    for (const auto& a : axes) total *= static_cast<std::size_t>(std::max(a.count, 0));
    if (total == 0) return out;
    std::vector<int> idx(axes.size(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        Vector p(axes.size());
        for (std::size_t d = 0; d < axes.size(); ++d) {
            const auto& a = axes[d];
            p[d] = a.count == 1 ? a.min : a.min + (a.max - a.min) * idx[d] / (a.count - 1);
        }
        out.push_back(std::move(p));
        for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
            if (++idx[static_cast<std::size_t>(d)] < axes[static_cast<std::size_t>(d)].count) break;
            idx[static_cast<std::size_t>(d)] = 0;
        }
    }
    return out;
}

inline std::string point_text(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += format_double(p[i]);
    }
    return s + ")";
}

} // namespace detail

/// Sample points in deterministic order: the explicit list as given, or the grid in
/// lexicographic order with the first coordinate varying slowest. Every point is checked
/// against the domain constraints.
inline std::vector<Vector> sample_points(const ManifoldSpec& spec) {
    auto pts = detail::enumerate_samples(spec);
    if (pts.empty()) throw SchemaError("samples", "sample specification produces zero points");
    for (std::size_t k = 0; k < pts.size(); ++k) {
        for (std::size_t c = 0; c < spec.domain.size(); ++c) {
            double v = 0.0;
            try {
                v = eval_value(spec.domain[c], pts[k]);
            } catch (const DomainError& e) {
                throw SchemaError("domain[" + std::to_string(c) + "]",
                                  "cannot evaluate at point #" + std::to_string(k) + " " + detail::point_text(pts[k]) +
                                      ": " + e.what());
            }
            if (!(v > 0.0))
                throw SchemaError("domain[" + std::to_string(c) + "]",
                                  "constraint '" + spec.expr_text(spec.domain[c]) + " > 0' violated at point #" +
                                      std::to_string(k) + " " + detail::point_text(pts[k]));
        }
    }
    return pts;
}

namespace detail {

inline ManifoldSpec load_manifold_impl(std::string_view document) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError("", std::string("malformed document: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("", "top level must be an object");
    detail::reject_unknown(doc,
                           {"version", "name", "dimension", "coordinates", "metric", "declared_ricci", "vector_fields",
                            "one_forms", "scalars", "domain", "samples", "generators", "tolerances",
                            "verify_components", "discrepancies"},
                           "");
    if (doc.contains("version")) {
        if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kManifoldSchemaVersion)
            throw SchemaError("version", "unsupported schema version");
    }

    ManifoldSpec spec;
    const auto& name = detail::require(doc, "name", "");
    if (!name.is_string()) throw SchemaError("name", "expected a string");
    spec.name = name.get<std::string>();

    const auto& dim = detail::require(doc, "dimension", "");
    if (!dim.is_number_integer() || dim.get<int>() < 2 || dim.get<int>() > kMaxDimension)
        throw SchemaError("dimension", "expected an integer in 2.." + std::to_string(kMaxDimension));
    spec.dimension = dim.get<int>();
    const int n = spec.dimension;

    const auto& coords = detail::require(doc, "coordinates", "");
    if (!coords.is_array() || static_cast<int>(coords.size()) != n)
        throw SchemaError("coordinates", "expected " + std::to_string(n) + " names");
    for (const auto& c : coords) {
        if (!c.is_string() || c.get<std::string>().empty()) throw SchemaError("coordinates", "names must be non-empty strings");
        spec.coordinates.push_back(c.get<std::string>());
    }
    if (std::set<std::string>(spec.coordinates.begin(), spec.coordinates.end()).size() != spec.coordinates.size())
        throw SchemaError("coordinates", "names must be distinct");
    const auto& cn = spec.coordinates;

    spec.metric = detail::parse_symmetric(detail::require(doc, "metric", ""), cn, "metric");
    if (doc.contains("declared_ricci")) spec.declared_ricci = detail::parse_symmetric(doc["declared_ricci"], cn, "declared_ricci");

    auto parse_fields = [&](const char* key, std::map<std::string, std::vector<ScalarExpr>>& into) {
        if (!doc.contains(key)) return;
        const auto& obj = doc[key];
        if (!obj.is_object()) throw SchemaError(key, "expected a map of name -> component array");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            into.emplace(it.key(), detail::parse_components(it.value(), cn, std::string(key) + "." + it.key()));
    };
    parse_fields("vector_fields", spec.vector_fields);
    parse_fields("one_forms", spec.one_forms);

    if (doc.contains("scalars")) {
        const auto& obj = doc["scalars"];
        if (!obj.is_object()) throw SchemaError("scalars", "expected a map of name -> expression");
        for (auto it = obj.begin(); it != obj.end(); ++it)
            spec.scalars.emplace(it.key(), detail::parse_field(it.value(), cn, "scalars." + it.key()));
    }
    if (doc.contains("domain")) {
        const auto& arr = doc["domain"];
        if (!arr.is_array()) throw SchemaError("domain", "expected a list of expressions");
        for (std::size_t i = 0; i < arr.size(); ++i)
            spec.domain.push_back(detail::parse_field(arr[i], cn, "domain[" + std::to_string(i) + "]"));
    }

    {
        const auto& s = detail::require(doc, "samples", "");
        if (!s.is_object()) throw SchemaError("samples", "expected an object");
        detail::reject_unknown(s, {"points", "grid"}, "samples");
        if (s.contains("points") == s.contains("grid"))
            throw SchemaError("samples", "exactly one of 'points' or 'grid' is required");
        if (s.contains("points")) {
            const auto& arr = s["points"];
            if (!arr.is_array()) throw SchemaError("samples.points", "expected a list of points");
            for (std::size_t k = 0; k < arr.size(); ++k) {
                const std::string p = "samples.points[" + std::to_string(k) + "]";
                if (!arr[k].is_array() || static_cast<int>(arr[k].size()) != n)
                    throw SchemaError(p, "expected " + std::to_string(n) + " coordinates");
                Vector pt;
                for (std::size_t c = 0; c < arr[k].size(); ++c)
                    pt.push_back(detail::parse_number(arr[k][c], p + "[" + std::to_string(c) + "]"));
                spec.samples.points.push_back(std::move(pt));
            }
        } else {
            spec.samples.is_grid = true;
            const auto& grid = s["grid"];
            if (!grid.is_object()) throw SchemaError("samples.grid", "expected a map coordinate -> range");
            for (auto it = grid.begin(); it != grid.end(); ++it)
                if (std::find(cn.begin(), cn.end(), it.key()) == cn.end())
                    throw SchemaError("samples.grid", "unknown coordinate '" + it.key() + "'");
            for (const auto& c : cn) {
                const std::string p = "samples.grid." + c;
                const auto& ax = detail::require(grid, c, "samples.grid");
                if (!ax.is_object()) throw SchemaError(p, "expected {min, max, count} or {value}");
                detail::reject_unknown(ax, {"min", "max", "count", "value"}, p);
                GridAxis a;
                if (ax.contains("value")) {
                    if (ax.size() != 1) throw SchemaError(p, "'value' excludes min/max/count");
                    a.min = a.max = detail::parse_number(ax["value"], p + ".value");
                    a.count = 1;
                } else {
                    a.min = detail::parse_number(detail::require(ax, "min", p), p + ".min");
                    a.max = detail::parse_number(detail::require(ax, "max", p), p + ".max");
                    const auto& cnt = detail::require(ax, "count", p);
                    if (!cnt.is_number_integer() || cnt.get<int>() < 0) throw SchemaError(p + ".count", "expected a non-negative integer");
                    a.count = cnt.get<int>();
                    if (a.count == 1 && a.min != a.max) throw SchemaError(p, "count 1 requires min == max");
                }
                spec.samples.grid.push_back(a);
            }
        }
    }

    if (doc.contains("generators")) {
        const auto& gen = doc["generators"];
        if (!gen.is_object()) throw SchemaError("generators", "expected an object");
        detail::reject_unknown(gen, {"fields", "forms"}, "generators");
        const auto& f = detail::require(gen, "fields", "generators");
        if (!f.is_array() || f.size() != 3) throw SchemaError("generators.fields", "expected [U, V, T]");
        GeneratorTriple t;
        t.u = f[0].get<std::string>();
        t.v = f[1].get<std::string>();
        t.t = f[2].get<std::string>();
        for (const auto* nm : {&t.u, &t.v, &t.t})
            if (!spec.vector_fields.contains(*nm)) throw SchemaError("generators.fields", "unknown vector field '" + *nm + "'");
        if (gen.contains("forms")) {
            const auto& fo = gen["forms"];
            if (!fo.is_array() || fo.size() != 3) throw SchemaError("generators.forms", "expected [A, B, D]");
            std::array<std::string, 3> names{fo[0].get<std::string>(), fo[1].get<std::string>(), fo[2].get<std::string>()};
            for (const auto& nm : names)
                if (!spec.one_forms.contains(nm)) throw SchemaError("generators.forms", "unknown 1-form '" + nm + "'");
            t.forms = names;
        }
        spec.generators = t;
    }

    if (doc.contains("tolerances")) {
        const auto& tol = doc["tolerances"];
        if (!tol.is_object()) throw SchemaError("tolerances", "expected an object");
        detail::reject_unknown(tol, {"orthonormality"}, "tolerances");
        if (tol.contains("orthonormality")) {
            const double v = detail::parse_number(tol["orthonormality"], "tolerances.orthonormality");
            if (!(v > 0.0)) throw SchemaError("tolerances.orthonormality", "must be positive");
            spec.orthonormality_tolerance = v;
        }
    }

    if (doc.contains("verify_components")) {
        const auto& arr = doc["verify_components"];
        if (!arr.is_array()) throw SchemaError("verify_components", "expected a list of \"i,j\" keys");
        for (const auto& k : arr) {
            if (!k.is_string()) throw SchemaError("verify_components", "expected \"i,j\" strings");
            auto idx = detail::parse_component(k.get<std::string>(), n, 2, "verify_components");
            spec.verify_components.emplace_back(std::min(idx[0], idx[1]), std::max(idx[0], idx[1]));
        }
    }

    if (doc.contains("discrepancies")) {
        const auto& arr = doc["discrepancies"];
        if (!arr.is_array()) throw SchemaError("discrepancies", "expected a list");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string p = "discrepancies[" + std::to_string(k) + "]";
            const auto& d = arr[k];
            if (!d.is_object()) throw SchemaError(p, "expected an object");
            detail::reject_unknown(d, {"quantity", "component", "scalar", "printed", "note"}, p);
            Discrepancy disc;
            disc.quantity = detail::require(d, "quantity", p).get<std::string>();
            std::size_t rank = 0;
            if (disc.quantity == "christoffel") rank = 3;
            else if (disc.quantity == "riemann") rank = 4;
            else if (disc.quantity == "ricci") rank = 2;
            else if (disc.quantity == "scalar_curvature") rank = 0;
            else if (disc.quantity == "scalar") {
                disc.scalar = detail::require(d, "scalar", p).get<std::string>();
                if (!spec.scalars.contains(disc.scalar)) throw SchemaError(p + ".scalar", "unknown scalar '" + disc.scalar + "'");
            } else
                throw SchemaError(p + ".quantity", "unknown quantity '" + disc.quantity + "'");
            if (rank > 0) disc.component = detail::parse_component(detail::require(d, "component", p).get<std::string>(), n, rank, p + ".component");
            disc.printed = detail::parse_field(detail::require(d, "printed", p), cn, p + ".printed");
            if (d.contains("note")) disc.note = d["note"].get<std::string>();
            spec.discrepancies.push_back(std::move(disc));
        }
    }

    // Point-wise validation: domain constraints, then positive definiteness of g.
    const auto pts = sample_points(spec);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        Matrix g(n);
        try {
            g = metric_at(spec, pts[k]);
        } catch (const DomainError& e) {
            throw SchemaError("metric", "cannot evaluate at point #" + std::to_string(k) + " " +
                                            detail::point_text(pts[k]) + ": " + e.what());
        }
        const auto minors = leading_minors(g);
        const double scale = std::max(max_abs(g), 1e-300);
        for (std::size_t m = 0; m < minors.size(); ++m) {
            if (!(minors[m] > 1e-12 * std::pow(scale, static_cast<double>(m + 1))))
                throw SchemaError("metric", "not positive definite at point #" + std::to_string(k) + " " +
                                                detail::point_text(pts[k]) + ": leading minor " + std::to_string(m + 1) +
                                                " = " + format_double(minors[m]));
        }
    }

    if (spec.generators) {
        const auto& t = *spec.generators;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            double r = 0.0;
            try {
                r = orthonormality_residual(spec, t, pts[k]);
            } catch (const DomainError& e) {
                spec.warnings.push_back("generators: cannot evaluate at point #" + std::to_string(k) + ": " + e.what());
                continue;
            }
            if (r > spec.orthonormality_tolerance)
                spec.warnings.push_back("generators: not orthonormal at point #" + std::to_string(k) + " (residual " +
                                        format_double(r) + ")");
            if (t.forms) {
                const Matrix g = metric_at(spec, pts[k]);
                const std::array<const std::string*, 3> fields{&t.u, &t.v, &t.t};
                for (int f = 0; f < 3; ++f) {
                    try {
                        const Vector lowered = lower(g, eval_components(spec.vector_fields.at(*fields[f]), pts[k]));
                        const Vector listed = eval_components(spec.one_forms.at((*t.forms)[f]), pts[k]);
                        double diff = 0.0;
                        for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(lowered[i] - listed[i]));
                        if (diff > spec.orthonormality_tolerance)
                            spec.warnings.push_back("generators: 1-form '" + (*t.forms)[f] + "' differs from lowered '" +
                                                    *fields[f] + "' at point #" + std::to_string(k) + " by " + format_double(diff));
                    } catch (const DomainError& e) {
                        spec.warnings.push_back("generators: cannot evaluate 1-form '" + (*t.forms)[f] + "' at point #" +
                                                std::to_string(k) + ": " + e.what());
                    }
                }
            }
        }
    }
    return spec;
}

} // namespace detail

/// Parses and validates a manifold document (JSON text).
inline ManifoldSpec load_manifold(std::string_view document) {
    try {
        return detail::load_manifold_impl(document);
    } catch (const detail::json::exception& e) {
        throw SchemaError("", std::string("unexpected value type: ") + e.what());
    }
}

inline ManifoldSpec load_manifold_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("", "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_manifold(ss.str());
}

/// Canonical JSON form. Loading the output yields a spec equal to the input
/// (modulo loader warnings).
inline std::string serialize_manifold(const ManifoldSpec& spec) {
    using detail::json;
    const int n = spec.dimension;
    json doc;
    doc["version"] = kManifoldSchemaVersion;
    doc["name"] = spec.name;
    doc["dimension"] = n;
    doc["coordinates"] = spec.coordinates;
    auto sym = [&](const Tensor<2, ScalarExpr>& m) {
        json o = json::object();
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const std::string t = spec.expr_text(m(i, j));
                if (t != "0") o[std::to_string(i + 1) + "," + std::to_string(j + 1)] = t;
            }
        return o;
    };
    doc["metric"] = sym(spec.metric);
    if (spec.declared_ricci) doc["declared_ricci"] = sym(*spec.declared_ricci);
    auto fields = [&](const std::map<std::string, std::vector<ScalarExpr>>& m) {
        json o = json::object();
        for (const auto& [k, v] : m) {
            json a = json::array();
            for (const auto& e : v) a.push_back(spec.expr_text(e));
            o[k] = a;
        }
        return o;
    };
    if (!spec.vector_fields.empty()) doc["vector_fields"] = fields(spec.vector_fields);
    if (!spec.one_forms.empty()) doc["one_forms"] = fields(spec.one_forms);
    if (!spec.scalars.empty()) {
        json o = json::object();
        for (const auto& [k, v] : spec.scalars) o[k] = spec.expr_text(v);
        doc["scalars"] = o;
    }
    if (!spec.domain.empty()) {
        json a = json::array();
        for (const auto& e : spec.domain) a.push_back(spec.expr_text(e));
        doc["domain"] = a;
    }
    if (spec.samples.is_grid) {
        json g = json::object();
        for (int c = 0; c < n; ++c) {
            const auto& a = spec.samples.grid[static_cast<std::size_t>(c)];
            if (a.count == 1) g[spec.coordinates[static_cast<std::size_t>(c)]] = {{"value", a.min}};
            else g[spec.coordinates[static_cast<std::size_t>(c)]] = {{"min", a.min}, {"max", a.max}, {"count", a.count}};
        }
        doc["samples"] = {{"grid", g}};
    } else {
        doc["samples"] = {{"points", spec.samples.points}};
    }
    if (spec.generators) {
        json g;
        g["fields"] = {spec.generators->u, spec.generators->v, spec.generators->t};
        if (spec.generators->forms) g["forms"] = *spec.generators->forms;
        doc["generators"] = g;
    }
    doc["tolerances"] = {{"orthonormality", spec.orthonormality_tolerance}};
    if (!spec.verify_components.empty()) {
        json a = json::array();
        for (auto [i, j] : spec.verify_components) a.push_back(std::to_string(i + 1) + "," + std::to_string(j + 1));
        doc["verify_components"] = a;
    }
    if (!spec.discrepancies.empty()) {
        json a = json::array();
        for (const auto& d : spec.discrepancies) {
            json o;
            o["quantity"] = d.quantity;
            if (!d.component.empty()) o["component"] = detail::component_key(d.component);
            if (!d.scalar.empty()) o["scalar"] = d.scalar;
            o["printed"] = spec.expr_text(d.printed);
            if (!d.note.empty()) o["note"] = d.note;
            a.push_back(o);
        }
        doc["discrepancies"] = a;
    }
    return doc.dump(2);
}

} // namespace eqcheck
