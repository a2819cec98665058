#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eqcheck/expr.hpp"
#include "eqcheck/tensor.hpp"

namespace eqcheck {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class Verdict { Pass, Fail, Indeterminate };

inline std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

/// FNV-1a over the raw document bytes, as 16 hex digits.
inline std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

struct PointEntry {
    std::size_t point = 0;  // index into the report's sample order
    nlohmann::json values = nlohmann::json::object();
};

struct CheckEntry {
    std::string id;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<PointEntry> points;
    nlohmann::json aggregate = nlohmann::json::object();
    Verdict verdict = Verdict::Indeterminate;
    std::vector<std::string> notes;
};

struct CheckReport {
    std::string spec_name;
    std::string spec_hash;
    nlohmann::json config = nlohmann::json::object();
    std::vector<Vector> points;
    std::vector<CheckEntry> checks;
    std::vector<std::string> warnings;

    Verdict status() const {
        for (const auto& c : checks)
            if (c.verdict == Verdict::Fail) return Verdict::Fail;
        return Verdict::Pass;
    }
    int exit_code() const { return status() == Verdict::Fail ? 1 : 0; }
};

/// Components "i,j" (1-based) of a matrix, every entry.
inline nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json o = nlohmann::json::object();
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) o[std::to_string(i + 1) + "," + std::to_string(j + 1)] = m(i, j);
    return o;
}

inline nlohmann::json to_json(const CheckReport& r) {
    using nlohmann::json;
    json checks = json::array();
    for (const auto& c : r.checks) {
        json pts = json::array();
        for (const auto& p : c.points) pts.push_back({{"point", p.point}, {"values", p.values}});
        checks.push_back({{"id", c.id},
                          {"parameters", c.parameters},
                          {"points", pts},
                          {"aggregate", c.aggregate},
                          {"verdict", verdict_name(c.verdict)},
                          {"notes", c.notes}});
    }
    return {{"version", kReportSchemaVersion},
            {"tool_version", kToolVersion},
            {"spec", {{"name", r.spec_name}, {"hash", r.spec_hash}}},
            {"config", r.config},
            {"points", r.points},
            {"checks", checks},
            {"warnings", r.warnings},
            {"status", verdict_name(r.status())}};
}

inline std::string render_json(const CheckReport& r) { return to_json(r).dump(2) + "\n"; }

namespace detail {

inline std::string scalar_text(const nlohmann::json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

} // namespace detail

/// Human-readable summary: one block per check with its aggregate values and notes.
inline std::string render_text(const CheckReport& r) {
    std::ostringstream out;
    out << "eqcheck " << kToolVersion << "\n";
    out << "spec     " << r.spec_name << " (" << r.spec_hash << ")\n";
    for (const auto& [k, v] : r.config.items()) out << "  " << k << " = " << detail::scalar_text(v) << "\n";
    out << "points   " << r.points.size() << "\n";
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    out << "\n";
    for (const auto& c : r.checks) {
        out << "[" << verdict_name(c.verdict) << "] " << c.id << "\n";
        for (const auto& [k, v] : c.aggregate.items()) {
            if (v.is_object() || v.is_array()) {
                out << "    " << k << ":";
                if (v.is_array()) {
                    for (const auto& x : v) out << " " << detail::scalar_text(x);
                    out << "\n";
                } else {
                    out << "\n";
                    for (const auto& [kk, vv] : v.items()) out << "      " << kk << " = " << detail::scalar_text(vv) << "\n";
                }
            } else {
                out << "    " << k << " = " << detail::scalar_text(v) << "\n";
            }
        }
        for (const auto& n : c.notes) out << "    note: " << n << "\n";
    }
    out << "\nstatus: " << verdict_name(r.status()) << "\n";
    return out.str();
}

} // namespace eqcheck
