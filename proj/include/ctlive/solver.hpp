#pragma once

// Satisfiability backends over terms: the built-in bit-blasting checker and
// an external SMT-LIB solver driven through a subprocess.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ctlive/term.hpp"

namespace ctlive::smt {

enum class Answer { Sat, Unsat, Unknown };

std::string answer_name(Answer a);

struct Model {
    /// Variable name -> value (booleans as 0/1).
    std::map<std::string, uint64_t> values;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    /// Satisfiability of the conjunction. The model is filled on Sat when
    /// the backend can provide one.
    virtual Answer check(TermManager& tm, const std::vector<Term>& assertions, Model* model) = 0;
};

class BuiltinBackend : public Backend {
public:
    std::string name() const override { return "builtin"; }
    Answer check(TermManager& tm, const std::vector<Term>& assertions, Model* model) override;
};

/// Feeds a QF_UFBV script on standard input and reads the first sat/unsat
/// token from standard output. Never fills models.
class ExternalBackend : public Backend {
public:
    explicit ExternalBackend(std::string command) : command_(std::move(command)) {}
    std::string name() const override { return "external:" + command_; }
    Answer check(TermManager& tm, const std::vector<Term>& assertions, Model* model) override;
    const std::string& command() const { return command_; }

private:
    std::string command_;
};

/// Environment variable naming the external solver command used when
/// `external:` comes without one.
inline constexpr const char* kSolverEnv = "CTLIVE_SMT_SOLVER";

/// "builtin", "external:<command>" or "external:". Throws
/// SolverUnavailable when no command can be determined or it cannot run.
std::unique_ptr<Backend> make_backend(const std::string& spec);

enum class Validity { Valid, CounterModel, Unknown };

struct ImplicationResult {
    Validity validity = Validity::Unknown;
    Model model;
};

/// Valid iff antecedent and not consequent is unsatisfiable.
ImplicationResult check_implication(TermManager& tm, Term antecedent, Term consequent, Backend& backend);

/// SMT-LIB sort of a term: Bool or (_ BitVec w).
std::string smt_sort(unsigned width);
/// Quoted SMT-LIB symbol for a variable or function name.
std::string smt_symbol(const std::string& name);
/// Prints a term, let-binding subterms that occur more than once.
std::string smt_term(const TermManager& tm, Term t);
/// Declarations of the uninterpreted function symbols used by the terms.
std::string smt_function_declarations(const TermManager& tm, const std::vector<Term>& terms);
/// Declarations of every variable and function symbol used by the terms.
std::string smt_declarations(const TermManager& tm, const std::vector<Term>& terms);
/// Complete QF_UFBV script asserting the terms, ending in check-sat.
std::string smt_query(const TermManager& tm, const std::vector<Term>& assertions);

}  // namespace ctlive::smt
