#pragma once

// Verification conditions for liveness equivalence of a product program:
// one clock cycle as a transition formula, Horn clauses over an unknown
// invariant, a conjunctive (Houdini) solver over candidate predicates and a
// bounded search for concrete counterexamples.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ctlive/instrument.hpp"
#include "ctlive/semantics.hpp"
#include "ctlive/solver.hpp"
#include "ctlive/term.hpp"

namespace ctlive {

struct VcOptions {
    /// Multiplications wider than this become uninterpreted functions.
    unsigned uf_mul_width = 8;
    /// Additions and subtractions wider than this become uninterpreted.
    unsigned uf_add_width = 16;
    /// Interpret every builtin operator regardless of width.
    bool interpret_all = false;
};

struct StateVar {
    std::string name;
    unsigned width = 1;
};

/// One cycle of the product, from the label of cycle i to the label of
/// cycle i + 1. The state holds every register of both copies with its
/// shadow, plus an `issued` bit that records whether the issue cycle has
/// passed. Wires are not state: they are recomputed inside the cycle.
struct TransitionFormula {
    std::shared_ptr<smt::TermManager> tm;
    /// Registers of the original program, sorted.
    std::vector<std::string> registers;
    std::vector<std::string> sources;
    std::vector<StateVar> state;
    /// Pre-state variables "v" and post-state variables "v'".
    std::vector<smt::Term> pre, post;
    /// Post-state values as functions of the pre-state and the inputs.
    std::vector<smt::Term> next;
    /// Fresh per-cycle symbols: next source values, undriven wires, issue.
    std::vector<smt::Term> inputs;
    /// Whether the next label is the issue cycle (shared by both copies).
    smt::Term issue = 0;
    /// Each post variable equals its next value, and issue happens at most once.
    smt::Term constraint = 0;

    smt::Term pre_var(const std::string& name) const;
    smt::Term post_var(const std::string& name) const;
    size_t index(const std::string& name) const;
};

/// Throws CombinationalLoop when the wires are cyclic.
TransitionFormula compile_cycle(const ProductProgram& pp, const VcOptions& opt = {});

struct HornClause {
    enum class Kind { Init, Step, Assert };
    Kind kind = Kind::Init;
    /// Conjuncts of the body besides the invariant.
    std::vector<smt::Term> body;
    /// Assert clauses: the required formula.
    smt::Term head = 0;
};

std::string clause_name(HornClause::Kind k);

/// Init(s) => Inv(s); Inv(s) & Chan(s) & Trans(s, s') & Chan(s') => Inv(s');
/// Inv(s) & Chan(s) => Assert(s).
struct HornSystem {
    TransitionFormula trans;
    smt::Term init = 0, channel_pre = 0, channel_post = 0, assertion = 0;
    /// (live$s$L, live$s$R) per register sink.
    std::vector<std::pair<std::string, std::string>> assertion_pairs;
    std::vector<HornClause> clauses;

    size_t arity() const { return trans.state.size(); }
};

/// Assumptions must mention registers only.
HornSystem generate_horn(const ProductProgram& pp, const AnnotationSet& annots, const VcOptions& opt = {});

struct Predicate {
    std::string text;
    smt::Term pre = 0, post = 0;
    bool hint = false;
};

struct PredicateUniverse {
    std::vector<Predicate> predicates;
};

/// "live x = live y": same-run liveness equality on both copies.
struct Hint {
    std::string x, y;
    friend bool operator==(const Hint&, const Hint&) = default;
};

/// One hint per line; blank lines and lines starting with // or # are skipped.
std::vector<Hint> parse_hints(const std::string& text, const std::string& filename = "<hints>");

/// Per register x: x$L = x$R, live$x$L = live$x$R, live$x$L = 0,
/// live$x$R = 0; each hint adds live$x$L = live$y$L and live$x$R = live$y$R.
PredicateUniverse predicate_universe(const HornSystem& hs, const std::vector<Hint>& hints = {});

struct VerifierVerdict {
    enum class Result { Verified, CannotProve };
    Result result = Result::CannotProve;
    /// Surviving predicates.
    std::vector<std::string> invariant;
    /// Predicates dropped, in drop order, with the clause that dropped them.
    std::vector<std::pair<std::string, std::string>> dropped;
    /// Empty when verified; otherwise the clause that fails, e.g.
    /// "assert live$out$L = live$out$R".
    std::string failing_clause;
    size_t iterations = 0;
    size_t queries = 0;
    /// The solver answered neither sat nor unsat at least once.
    bool unknown_answers = false;

    bool verified() const { return result == Result::Verified; }
    nlohmann::json to_json() const;
};

std::string result_name(VerifierVerdict::Result r);

/// Greatest inductive subset of the universe, then the assert check. A null
/// backend uses the built-in incremental checker.
VerifierVerdict houdini_solve(const HornSystem& hs, const PredicateUniverse& pu, smt::Backend* backend = nullptr);

/// Constrained-Horn SMT-LIB script with one invariant relation.
std::string emit_smtlib(const HornSystem& hs);

struct BmcWitness {
    InputSchedule left, right;
    uint64_t t = 0;
    uint64_t cycle = 0;
    std::string sink;
    size_t depth = 0;

    nlohmann::json to_json() const;
};

/// Searches input pairs over `depth` labels with values below 2^width for
/// a label where some sink's liveness differs between the copies. Every
/// witness is replayed through the interpreter before it is returned.
std::optional<BmcWitness> bmc_refute(const ProductProgram& pp, const AnnotationSet& annots, size_t depth,
                                     unsigned width);

}  // namespace ctlive
