#pragma once

// Translation of terms to clauses. Uninterpreted applications get fresh
// result bits plus a congruence clause against every earlier application of
// the same symbol (Ackermann expansion), so blasting is incremental.

#include <unordered_map>
#include <vector>

#include "ctlive/sat.hpp"
#include "ctlive/term.hpp"

namespace ctlive::smt {

class BitBlaster {
public:
    BitBlaster(TermManager& tm, sat::Solver& solver);

    /// Literal equivalent to a boolean term.
    sat::Lit lit(Term t);
    /// Literals of a bit-vector term, least significant first.
    const std::vector<sat::Lit>& bits(Term t);

    sat::Lit true_lit() const { return true_; }
    /// Value of a blasted term in the solver's last model.
    uint64_t model_value(Term t);

private:
    sat::Lit fresh() { return sat::mk_lit(solver_.new_var()); }
    sat::Lit mk_and(sat::Lit a, sat::Lit b);
    sat::Lit mk_and(const std::vector<sat::Lit>& ls);
    sat::Lit mk_or(sat::Lit a, sat::Lit b) { return sat::neg(mk_and(sat::neg(a), sat::neg(b))); }
    sat::Lit mk_or(const std::vector<sat::Lit>& ls);
    sat::Lit mk_xor(sat::Lit a, sat::Lit b);
    sat::Lit mk_ite(sat::Lit c, sat::Lit a, sat::Lit b);
    sat::Lit mk_eq(const std::vector<sat::Lit>& a, const std::vector<sat::Lit>& b);
    sat::Lit mk_ult(const std::vector<sat::Lit>& a, const std::vector<sat::Lit>& b);
    std::vector<sat::Lit> add(const std::vector<sat::Lit>& a, const std::vector<sat::Lit>& b, sat::Lit carry);
    std::vector<sat::Lit> mul(const std::vector<sat::Lit>& a, const std::vector<sat::Lit>& b);
    std::vector<sat::Lit> shift(const std::vector<sat::Lit>& a, const std::vector<sat::Lit>& b, bool left);
    bool is_true(sat::Lit l) const { return l == true_; }
    bool is_false(sat::Lit l) const { return l == sat::neg(true_); }

    void blast(Term t);

    TermManager& tm_;
    sat::Solver& solver_;
    sat::Lit true_;
    std::unordered_map<Term, std::vector<sat::Lit>> cache_;
    std::unordered_map<uint32_t, std::vector<Term>> applications_;
};

}  // namespace ctlive::smt
