#pragma once

// Machine-readable reports: one JSON document per run, or CSV with one row
// per (check, sample). Nothing time- or host-dependent is written unless the
// caller sets elapsed_ms, so identical inputs give identical bytes.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "checks.hpp"

namespace qstieltjes {

inline constexpr std::string_view version = "0.1.0";

struct VerificationReport {
    std::string command;
    std::string family; // empty for family-free commands
    std::string mode;
    int precision = default_digits10;
    std::string tol;
    nlohmann::ordered_json sweep = nlohmann::ordered_json::object();
    std::vector<CheckRecord> checks;
    nlohmann::ordered_json data = nlohmann::ordered_json::object();
    std::optional<double> elapsed_ms;

    [[nodiscard]] bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    [[nodiscard]] const CheckRecord* first_failure() const
    {
        for (const auto& c : checks)
            if (!c.pass) return &c;
        return nullptr;
    }
};

[[nodiscard]] inline nlohmann::ordered_json to_json(const CheckRecord& c)
{
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["anchor"] = c.anchor;
    j["residual"] = c.residual;
    j["tol"] = c.tol;
    j["pass"] = c.pass;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : c.rows) {
        nlohmann::ordered_json row;
        row["sample"] = r.sample;
        row["residual"] = r.residual;
        row["pass"] = r.pass;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const VerificationReport& r)
{
    nlohmann::ordered_json j;
    j["version"] = version;
    j["command"] = r.command;
    j["family"] = r.family.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.family);
    j["mode"] = r.mode;
    j["precision"] = r.precision;
    j["tol"] = r.tol;
    j["sweep"] = r.sweep;
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    j["pass"] = r.pass();
    if (!r.data.empty()) j["data"] = r.data;
    j["elapsed_ms"] = r.elapsed_ms ? nlohmann::ordered_json(*r.elapsed_ms) : nlohmann::ordered_json(nullptr);
    return j;
}

inline void write_json(const VerificationReport& r, std::ostream& out) { out << to_json(r).dump(2) << '\n'; }

[[nodiscard]] inline std::string csv_field(const std::string& v)
{
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline void write_csv(const VerificationReport& r, std::ostream& out)
{
    out << "check,anchor,sample,residual,tol,pass\n";
    for (const auto& c : r.checks)
        for (const auto& row : c.rows)
            out << csv_field(c.name) << ',' << csv_field(c.anchor) << ',' << csv_field(row.sample) << ','
                << csv_field(row.residual) << ',' << csv_field(c.tol) << ',' << (row.pass ? "true" : "false") << '\n';
}

} // namespace qstieltjes
