#pragma once

// Race-freedom gate: a conservative static check and a randomized-schedule
// differ that runs the interpreter under two same-priority orderings.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctlive/ir.hpp"
#include "ctlive/semantics.hpp"

namespace ctlive {

enum class RaceKind { MultiWriter, ReadWriteIntraCycle, DynamicDivergence };

std::string race_kind_name(RaceKind k);

struct RaceFinding {
    RaceKind kind = RaceKind::MultiWriter;
    std::vector<std::string> variables;
    std::vector<int> process_ids;
    /// Dynamic findings: trial seed that reproduces the divergence.
    std::optional<uint64_t> replay_seed;
    /// Dynamic findings: first label where the two orderings differ.
    std::optional<uint64_t> cycle;
    std::string message;
};

struct RaceReport {
    std::vector<RaceFinding> findings;

    bool race_free() const { return findings.empty(); }
    nlohmann::json to_json() const;
};

/// Flags variables assigned in two processes, and registers blocking-assigned
/// in one process and read by another sequential process directly or
/// through wires.
RaceReport static_races(const Program& p);

struct DynamicOptions {
    unsigned n_cycles = 4;
    /// Inputs and initial values are drawn below 2^width (capped by the
    /// declared width).
    unsigned width = 8;
};

/// Runs `trials` random input schedules, each under two random orderings of
/// same-priority steps, and reports the first divergence of labels.
RaceReport dynamic_differ(const Program& p, const AnnotationSet& annots, size_t trials, uint64_t seed,
                          const DynamicOptions& opt = {});

/// Seed of trial i in dynamic_differ(..., seed).
uint64_t trial_seed(uint64_t seed, size_t i);

/// Re-runs one trial; returns the divergence when it reproduces.
std::optional<RaceFinding> replay_trial(const Program& p, const AnnotationSet& annots, uint64_t trial_seed,
                                        const DynamicOptions& opt = {});

}  // namespace ctlive
