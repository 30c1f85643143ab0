// commands.hpp: the five command modes and their report serialization.
#pragma once

#include "cli/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace polarcav::cli {

// Cells are json values: numbers, strings or bools. Non-finite doubles are
// kept as doubles and printed as nan/inf in tables, null in JSON.
struct Table {
    std::string name;
    std::vector<std::pair<std::string, nlohmann::json>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
};

struct Report {
    Command command{Command::spectrum};
    RunConfig config;
    std::vector<std::pair<std::string, nlohmann::json>> metadata;
    std::vector<std::string> warnings;
    std::vector<Table> tables;
    bool validity_breach{false};
};

[[nodiscard]] Report run_spectrum(const RunConfig& cfg);
[[nodiscard]] Report run_rates(const RunConfig& cfg);
[[nodiscard]] Report run_sweep(const RunConfig& cfg);
[[nodiscard]] Report run_crossings(const RunConfig& cfg);
[[nodiscard]] Report run_validate(const RunConfig& cfg);
[[nodiscard]] Report run(Command command, const RunConfig& cfg);

/// "%.12e"-style, "nan", "inf", "-inf".
[[nodiscard]] std::string format_number(double v);

/// Tab-separated tables under a "# key = value" header.
void write_table(std::ostream& out, const Report& report);
[[nodiscard]] nlohmann::json to_json(const Report& report);
void write_json(std::ostream& out, const Report& report);
/// Everything except the table rows; written next to table output.
[[nodiscard]] nlohmann::json metadata_json(const Report& report);

/// Least-squares slope of log|y| against log x, skipping zero or non-finite points.
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace polarcav::cli
