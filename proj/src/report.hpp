#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace geomq {

using Json = nlohmann::ordered_json;

extern const char* kVersion;

struct CheckRecord {
    std::string name;
    Json inputs = Json::object();
    Json values = Json::object();
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    double seconds = 0.0;
};

struct Report {
    Json config = Json::object();
    std::vector<CheckRecord> records;

    bool pass() const;
    Json to_json() const;       // records sorted by name; schema keys fixed
    std::string to_csv() const; // spectrum results only: index,eigenvalue,subtracted,degeneracy
};

// Parses and validates a config object: known keys only, typed values,
// positive tolerances, unsigned 64-bit seed. Returns the normalized echo.
Json parse_config(const std::string& text);
Json normalize_config(const Json& raw);

// Executes the configured command. Config errors throw; per-check compute
// failures become failing records.
Report run_config(const Json& config);

void write_atomic(const std::string& path, const std::string& content);

} // namespace geomq
