#pragma once

// Hash-consed terms over booleans and fixed-width bit-vectors, with
// uninterpreted function applications.

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace ctlive::smt {

using Term = uint32_t;

enum class Kind : uint8_t {
    Const,   // bool (width 0) or bit-vector constant
    Var,
    Not, And, Or, Ite, Eq,
    BvNot, BvAnd, BvOr, BvXor, BvAdd, BvSub, BvMul, BvShl, BvLshr,
    BvUlt, BvUle,
    Concat, Extract, ZeroExt,
    Apply,
};

struct Node {
    Kind kind = Kind::Const;
    /// 0 for booleans.
    unsigned width = 0;
    /// Constant bits, or the low bit index of an Extract.
    uint64_t value = 0;
    /// Variable or function symbol id.
    uint32_t symbol = 0;
    std::vector<Term> args;

    bool operator==(const Node& o) const {
        return kind == o.kind && width == o.width && value == o.value && symbol == o.symbol && args == o.args;
    }
};

class TermManager {
public:
    TermManager();

    const Node& node(Term t) const { return nodes_[t]; }
    unsigned width(Term t) const { return nodes_[t].width; }
    bool is_bool(Term t) const { return nodes_[t].width == 0; }
    bool is_const(Term t) const { return nodes_[t].kind == Kind::Const; }
    const std::string& symbol_name(uint32_t s) const { return symbols_[s]; }
    size_t size() const { return nodes_.size(); }

    Term tru() const { return true_; }
    Term fls() const { return false_; }
    Term boolean(bool b) const { return b ? true_ : false_; }
    Term bv(uint64_t value, unsigned width);
    /// Named variable; the same name and width give the same term.
    Term var(const std::string& name, unsigned width);
    Term apply(const std::string& fn, const std::vector<Term>& args, unsigned width);

    Term mk_not(Term a);
    Term mk_and(std::vector<Term> args);
    Term mk_and(Term a, Term b) { return mk_and(std::vector<Term>{a, b}); }
    Term mk_or(std::vector<Term> args);
    Term mk_or(Term a, Term b) { return mk_or(std::vector<Term>{a, b}); }
    Term mk_implies(Term a, Term b) { return mk_or(mk_not(a), b); }
    Term mk_ite(Term c, Term a, Term b);
    Term mk_eq(Term a, Term b);

    Term bv_not(Term a);
    Term bv_binary(Kind k, Term a, Term b);
    Term bv_ult(Term a, Term b);
    Term bv_ule(Term a, Term b);
    Term concat(Term hi, Term lo);
    /// Bits [lo, lo + width) of a.
    Term extract(Term a, unsigned lo, unsigned width);
    /// Zero-extends or truncates to the given width.
    Term resize(Term a, unsigned width);
    /// Boolean view of a bit-vector: a != 0.
    Term truth(Term a);
    /// One-bit vector of a boolean.
    Term to_bv1(Term b) { return mk_ite(b, bv(1, 1), bv(0, 1)); }

    /// Replaces variables by terms, rebuilding with simplification.
    Term substitute(Term t, const std::unordered_map<Term, Term>& map);
    /// Evaluates a term under an assignment of its variables (missing ones are 0).
    uint64_t evaluate(Term t, const std::unordered_map<Term, uint64_t>& vars,
                      const std::map<std::pair<uint32_t, std::vector<uint64_t>>, uint64_t>* functions = nullptr) const;

    /// Variables occurring in t, in increasing term order.
    std::vector<Term> vars_of(Term t) const;
    std::vector<Term> vars_of(const std::vector<Term>& ts) const;

    std::string str(Term t) const;

private:
    struct NodeHash {
        size_t operator()(const Node& n) const;
    };
    Term intern(Node n);
    uint32_t symbol(const std::string& name);

    std::vector<Node> nodes_;
    std::unordered_map<Node, Term, NodeHash> table_;
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, uint32_t> symbol_ids_;
    Term true_ = 0, false_ = 0;
};

uint64_t mask(unsigned width);

}  // namespace ctlive::smt
