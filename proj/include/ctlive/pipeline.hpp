#pragma once

// End-to-end driver: load, validate, race-check, instrument, build the
// product and verify, or one of the auxiliary modes. Every run produces a
// Report, also on errors.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ctlive/oracle.hpp"

namespace ctlive {

enum class Mode { Check, Simulate, Oracle, Races, Bmc, EmitIr, EmitVc };

std::string mode_name(Mode m);
/// Throws Error for an unknown name.
Mode parse_mode(const std::string& name);

enum class Verdict { Verified, Violation, CannotProve, Racy, IllFormed, Error };

std::string verdict_name(Verdict v);

/// 0 Verified, 1 Violation, 2 CannotProve, 3 Racy or Ill-formed, 4 error.
int exit_code(Verdict v);

inline constexpr int kReportSchemaVersion = 1;

std::string tool_version();

struct InputFile {
    std::string name;
    std::string content;
};

/// Reads a path, or a bundled benchmark file written as "bench:<file>";
/// "bench:<name>" without an extension means "<name>.v". Throws Error.
InputFile read_input(const std::string& path);

struct RunConfig {
    Mode mode = Mode::Check;
    /// Verilog sources, or a single ".ir" file in the textual IR.
    std::vector<InputFile> inputs;
    std::string top;
    /// Sidecar assumptions; they win over source comments.
    std::optional<InputFile> annot;
    std::optional<InputFile> hints;
    /// "builtin", "external:<command>" or "external:".
    std::string solver = "builtin";
    uint64_t seed = 1;

    /// CannotProve is followed by a bounded search of this depth and
    /// value width; depth 0 turns it off.
    size_t bmc_depth = 6;
    unsigned bmc_width = 1;

    OracleConfig oracle;

    /// Random-schedule trials of the dynamic race differ.
    size_t race_trials = 64;

    /// simulate: input schedule, a witness or a whole report as JSON. The
    /// default loads 0 into every source and register.
    std::optional<std::string> schedule_json;
    size_t sim_cycles = 6;
    std::optional<uint64_t> sim_issue = 0;

    /// emit-ir: "input", "instrumented" or "product".
    std::string stage = "input";

    /// Leave stage timings out of the report.
    bool timings = true;
};

struct Report {
    Mode mode = Mode::Check;
    /// Unset for modes that only produce output (simulate, emit-*, a
    /// race-free races run).
    std::optional<Verdict> verdict;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<std::string> diagnostics;
    /// Mode-specific payload: assumptions, invariant, witness, trace, ...
    nlohmann::json details = nlohmann::json::object();
    /// emit-ir / emit-vc text.
    std::string output;

    int exit_code() const;
    nlohmann::json to_json(bool with_timings = true) const;
};

Report run_pipeline(const RunConfig& cfg);

}  // namespace ctlive
