#pragma once

// Core intermediate representation: processes of loop-free statements that
// run once per clock cycle, composed in parallel.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ctlive {

class Expr {
public:
    enum class Kind { Var, Const, App };

    static Expr var(std::string name);
    /// width == 0 means the constant is unsized.
    static Expr constant(uint64_t value, unsigned width = 0);
    static Expr app(std::string symbol, std::vector<Expr> args);

    Expr() = default;

    Kind kind() const;
    bool is_var() const { return kind() == Kind::Var; }
    bool is_const() const { return kind() == Kind::Const; }
    bool is_app() const { return kind() == Kind::App; }
    bool valid() const { return node_ != nullptr; }

    /// Variable name or function symbol.
    const std::string& name() const;
    uint64_t value() const;
    unsigned const_width() const;
    const std::vector<Expr>& args() const;

    friend bool operator==(const Expr& a, const Expr& b);
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

private:
    struct Node {
        Kind kind;
        std::string name;
        uint64_t value = 0;
        unsigned width = 0;
        std::vector<Expr> args;
    };
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

enum class AssignKind { Blocking, NonBlocking, Continuous };

struct Stmt {
    enum class Kind { Skip, Assign, If, Seq };

    Kind kind = Kind::Skip;
    AssignKind assign_kind = AssignKind::Blocking;
    std::string lhs;
    /// Right-hand side for assignments, condition for If.
    Expr expr;
    /// If: {then, else}. Seq: the statements in order.
    std::vector<Stmt> children;

    static Stmt skip();
    static Stmt blocking(std::string lhs, Expr rhs);
    static Stmt nonblocking(std::string lhs, Expr rhs);
    static Stmt continuous(std::string lhs, Expr rhs);
    static Stmt ite(Expr cond, Stmt then_branch, Stmt else_branch);
    /// Flattens nested sequences and drops skips; a single statement is
    /// returned unwrapped, an empty list becomes Skip.
    static Stmt seq(std::vector<Stmt> stmts);

    bool is_assign() const { return kind == Kind::Assign; }
    const Stmt& then_branch() const { return children.at(0); }
    const Stmt& else_branch() const { return children.at(1); }

    friend bool operator==(const Stmt& a, const Stmt& b);
};

enum class ProcessKind { Sequential, Continuous };

struct Process {
    int id = 0;
    ProcessKind kind = ProcessKind::Sequential;
    Stmt body;

    friend bool operator==(const Process&, const Process&) = default;
};

enum class StorageClass { Register, Wire };

struct VarInfo {
    std::string name;
    StorageClass storage = StorageClass::Register;
    unsigned width = 1;

    bool is_register() const { return storage == StorageClass::Register; }
    bool is_wire() const { return storage == StorageClass::Wire; }
    friend bool operator==(const VarInfo&, const VarInfo&) = default;
};

struct Program {
    std::vector<Process> processes;
    std::map<std::string, VarInfo> vars;

    void declare(const std::string& name, StorageClass storage, unsigned width = 1);
    const VarInfo& var(const std::string& name) const;
    bool has_var(const std::string& name) const { return vars.count(name) != 0; }
    std::vector<std::string> registers() const;
    std::vector<std::string> wires() const;
    int next_process_id() const;

    friend bool operator==(const Program&, const Program&) = default;
};

enum class Side { L, R, Both };

/// One conjunct of a relational assumption.
struct Atom {
    enum class Kind { EqLR, EqConst, EqVars };
    Kind kind = Kind::EqLR;
    Side side = Side::Both;
    std::string x;
    std::string y;
    uint64_t value = 0;

    static Atom eq_lr(std::string x);
    static Atom eq_const(Side side, std::string x, uint64_t value);
    static Atom eq_vars(Side side, std::string x, std::string y);

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Formula {
    std::vector<Atom> atoms;

    std::set<std::string> vars() const;
    friend bool operator==(const Formula&, const Formula&) = default;
};

struct AnnotationSet {
    std::set<std::string> sources;
    std::set<std::string> sinks;
    std::vector<Formula> initial_eq;
    std::vector<Formula> always_eq;

    bool empty() const;
    friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct Diagnostic {
    std::string message;
    /// Variable or process the diagnostic refers to, when there is one.
    std::string subject;
    std::optional<int> process_id;
};

std::vector<Diagnostic> validate_program(const Program& program, const AnnotationSet& annots);

std::set<std::string> free_vars(const Expr& e);

/// Variables read by a statement, including branch conditions.
std::set<std::string> read_vars(const Stmt& s);

struct AssignSite {
    const Stmt* stmt;
    AssignKind kind;
    std::string lhs;
};
std::vector<AssignSite> assignments(const Stmt& s);

/// Continuous assignments of a continuous process, in order.
std::vector<const Stmt*> continuous_units(const Process& p);

/// A cycle in the wire dependency graph (w depends on the wires read by the
/// continuous assignments to w), listed in dependency order, or empty.
std::vector<std::string> find_wire_cycle(const Program& program);

/// Wires ordered so that every wire comes after the wires it depends on.
/// Throws CombinationalLoop when the dependency graph is cyclic.
std::vector<std::string> wire_topological_order(const Program& program);

/// Applies a variable renaming to every name in the statement.
Expr rename(const Expr& e, const std::map<std::string, std::string>& names);
Stmt rename(const Stmt& s, const std::map<std::string, std::string>& names);

/// Number of bits needed to represent v (at least 1).
unsigned bit_length(uint64_t v);

/// Symbols with a concrete bit-vector meaning in the interpreter and the
/// verification-condition generator.
bool is_builtin_symbol(const std::string& symbol);

/// Width of an expression's result. Comparisons and logical operators are
/// one bit wide; arithmetic and bitwise operators take the wider operand;
/// unsized constants take their bit length.
unsigned expr_width(const Expr& e, const Program& program);

/// Result width of a symbol given its argument widths (slice bounds are
/// passed separately since they are constants).
unsigned result_width(const std::string& symbol, const std::vector<unsigned>& arg_widths,
                      uint64_t slice_hi = 0, uint64_t slice_lo = 0);

}  // namespace ctlive
