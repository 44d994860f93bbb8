#pragma once

// Incremental CDCL satisfiability solver with solving under assumptions.

#include <cstdint>
#include <vector>

namespace ctlive::sat {

/// Literal: 2 * variable + (1 if negated).
using Lit = uint32_t;

inline Lit mk_lit(uint32_t var, bool negated = false) { return 2 * var + (negated ? 1 : 0); }
inline uint32_t var_of(Lit l) { return l >> 1; }
inline bool is_neg(Lit l) { return l & 1; }
inline Lit neg(Lit l) { return l ^ 1; }

enum class Result { Sat, Unsat };

class Solver {
public:
    Solver();

    uint32_t new_var();
    uint32_t num_vars() const { return static_cast<uint32_t>(assigns_.size()); }
    /// Adds a clause at decision level 0. Returns false when the clause set
    /// became unsatisfiable.
    bool add_clause(std::vector<Lit> lits);
    Result solve(const std::vector<Lit>& assumptions = {});
    /// Value of a variable in the last satisfying assignment.
    bool model_value(uint32_t var) const { return model_[var]; }
    bool model_value_lit(Lit l) const { return model_[var_of(l)] != is_neg(l); }

    uint64_t conflicts() const { return conflicts_; }

private:
    enum : int8_t { kFalse = 0, kTrue = 1, kUndef = 2 };
    struct Clause {
        std::vector<Lit> lits;
        bool learnt = false;
        double activity = 0;
    };
    struct Watch {
        uint32_t clause;
        Lit blocker;
    };

    int8_t value(Lit l) const {
        int8_t a = assigns_[var_of(l)];
        return a == kUndef ? int8_t{kUndef} : static_cast<int8_t>(a ^ static_cast<int8_t>(is_neg(l)));
    }
    uint32_t level() const { return static_cast<uint32_t>(trail_lim_.size()); }
    void assign(Lit l, int32_t reason);
    int32_t propagate();
    void analyze(int32_t conflict, std::vector<Lit>& learnt, uint32_t& back_level);
    void backtrack(uint32_t lvl);
    uint32_t attach(std::vector<Lit> lits, bool learnt);
    Lit pick_branch();
    void bump_var(uint32_t v);
    void bump_clause(Clause& c);
    void reduce_learnts();

    // Binary max-heap over variable activity.
    void heap_insert(uint32_t v);
    uint32_t heap_pop();
    void heap_up(size_t i);
    void heap_down(size_t i);
    bool heap_less(uint32_t a, uint32_t b) const { return activity_[a] > activity_[b]; }

    std::vector<Clause> clauses_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<int8_t> assigns_;
    std::vector<uint32_t> levels_;
    std::vector<int32_t> reasons_;
    std::vector<bool> phase_;
    std::vector<bool> model_;
    std::vector<double> activity_;
    std::vector<uint32_t> heap_;
    std::vector<int32_t> heap_pos_;
    std::vector<Lit> trail_;
    std::vector<uint32_t> trail_lim_;
    std::vector<char> seen_;
    std::vector<uint32_t> free_clauses_;
    size_t qhead_ = 0;
    double var_inc_ = 1.0;
    double clause_inc_ = 1.0;
    bool ok_ = true;
    uint64_t conflicts_ = 0;
    size_t num_learnts_ = 0;
};

}  // namespace ctlive::sat
