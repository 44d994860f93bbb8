#pragma once

// Exhaustive ground-truth checks of constant-time execution and liveness
// equivalence on small instances, and a random generator of race-free
// programs for differential testing.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctlive/ir.hpp"
#include "ctlive/semantics.hpp"

namespace ctlive {

struct OracleConfig {
    /// Bits per enumerated value (declared widths below this are kept).
    unsigned width = 1;
    unsigned n_cycles = 6;
    /// Issue cycles to test; empty means every t < n_cycles.
    std::vector<uint64_t> issue_cycles;
    /// Exhaustive enumeration up to this many input schedules.
    uint64_t max_schedules = uint64_t(1) << 16;
    /// Above the cap, sample max_schedules schedules instead of failing.
    bool sample = true;
    uint64_t seed = 1;
    unsigned threads = 1;

    void validate() const;
};

enum class Property { ConstantTime, LivenessEquivalent };

std::string property_name(Property p);

struct OracleWitness {
    InputSchedule left;
    InputSchedule right;
    uint64_t t = 0;
    uint64_t cycle = 0;
    std::string sink;
    /// Observed influence set or liveness bit on each side.
    std::string left_observation;
    std::string right_observation;
};

struct OracleVerdict {
    Property property = Property::ConstantTime;
    bool holds = true;
    std::optional<OracleWitness> witness;
    uint64_t pairs_checked = 0;
    uint64_t skipped_unknown_guards = 0;
    uint64_t schedules = 0;
    bool sampled = false;
    /// Label/lane combinations where a live variable lacks the issue cycle
    /// in its influence set. Always zero for a correct interpreter.
    uint64_t influence_violations = 0;

    nlohmann::json to_json() const;
};

/// Input schedules of the enumeration domain: every source value at every
/// cycle, plus the initial value of each non-source register that is read
/// or constrained. Other registers start at 0.
std::vector<InputSchedule> enumerate_schedules(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg);

/// Calls `yield` for each schedule pair whose traces satisfy the
/// assumptions, in enumeration order, until it returns false. Runs that hit
/// an unknown guard are left out. Returns the number of pairs yielded.
uint64_t enumerate_pairs(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg,
                         const std::function<bool(const InputSchedule&, const InputSchedule&)>& yield);

/// True when the stores of a left and right label satisfy the formula.
/// Unknown equals only Unknown.
bool formula_holds(const Formula& f, const Machine& m, const std::vector<Value>& left,
                   const std::vector<Value>& right);

OracleVerdict brute_force_ct(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg = {});
OracleVerdict brute_force_liveq(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg = {});
/// Both properties over one shared enumeration.
std::pair<OracleVerdict, OracleVerdict> brute_force_both(const Program& p, const AnnotationSet& annots,
                                                         const OracleConfig& cfg = {});

struct RandomProgram {
    Program program;
    AnnotationSet annots;
    uint64_t seed = 0;
};

/// Race-free program with at most 3 processes, 4 registers and 2 wires,
/// all one bit wide. Wires form a DAG and every variable is written by a
/// single process.
RandomProgram random_program(uint64_t seed);

struct CrosscheckCase {
    uint64_t seed = 0;
    std::string program;
    bool ct = true;
    bool liveq = true;
    uint64_t pairs_checked = 0;
    uint64_t skipped_unknown_guards = 0;
};

struct CrosscheckReport {
    uint64_t seed = 0;
    std::vector<CrosscheckCase> cases;
    /// Indices into cases where the two properties disagree.
    std::vector<size_t> disagreements;
    uint64_t influence_violations = 0;

    nlohmann::json to_json() const;
};

/// Generates `count` random programs and compares the two brute-force
/// checks on each.
CrosscheckReport property_crosscheck(uint64_t seed, size_t count, const OracleConfig& cfg = {});

/// Seed of the i-th program generated by property_crosscheck(seed, ...).
uint64_t crosscheck_case_seed(uint64_t seed, size_t i);

}  // namespace ctlive
