#pragma once

// Batch front end: one subcommand per verifier, JSON in, JSON (and CSV) out.
// Reports embed the resolved configuration and carry no timestamps, so equal
// configurations give byte-identical files for any worker count.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace carlab::cli {

/// Violated configuration bound; the message names the offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string command;
    /// Subcommand-specific JSON (config file contents); empty object when absent.
    nlohmann::json config = nlohmann::json::object();
    std::optional<int> m;
    std::optional<int> n;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;  // 0: available parallelism
    std::filesystem::path out_dir = ".";
};

struct RunResult {
    bool pass = false;
    nlohmann::json report;
    std::string csv;  // empty when the subcommand has no tabular output
};

const std::vector<std::string>& commands();

/// Throws ConfigError on invalid input.
void validate(const RunConfig& config);

/// Runs the verifier without touching the filesystem.
RunResult execute(const RunConfig& config);

/// execute + write <out>/<command>.json (and .csv).  Returns the exit status:
/// 0 iff every pass flag holds, 1 on a failed check, 2 on invalid input.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// JSON text exactly as written to the report file.
std::string render(const nlohmann::json& report);

}  // namespace carlab::cli
