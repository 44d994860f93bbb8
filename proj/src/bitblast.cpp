#include "ctlive/bitblast.hpp"

#include <stdexcept>

namespace ctlive::smt {

using sat::Lit;
using sat::neg;

BitBlaster::BitBlaster(TermManager& tm, sat::Solver& solver) : tm_(tm), solver_(solver) {
    true_ = fresh();
    solver_.add_clause({true_});
}

Lit BitBlaster::mk_and(Lit a, Lit b) {
    if (is_false(a) || is_false(b) || a == neg(b)) return neg(true_);
    if (is_true(a)) return b;
    if (is_true(b) || a == b) return a;
    Lit r = fresh();
    solver_.add_clause({neg(r), a});
    solver_.add_clause({neg(r), b});
    solver_.add_clause({r, neg(a), neg(b)});
    return r;
}

Lit BitBlaster::mk_and(const std::vector<Lit>& ls) {
    std::vector<Lit> keep;
    for (Lit l : ls) {
        if (is_false(l)) return neg(true_);
        if (!is_true(l)) keep.push_back(l);
    }
    if (keep.empty()) return true_;
    if (keep.size() == 1) return keep[0];
    Lit r = fresh();
    std::vector<Lit> big{r};
    for (Lit l : keep) {
        solver_.add_clause({neg(r), l});
        big.push_back(neg(l));
    }
    solver_.add_clause(big);
    return r;
}

Lit BitBlaster::mk_or(const std::vector<Lit>& ls) {
    std::vector<Lit> n;
    for (Lit l : ls) n.push_back(neg(l));
    return neg(mk_and(n));
}

Lit BitBlaster::mk_xor(Lit a, Lit b) {
    if (is_false(a)) return b;
    if (is_false(b)) return a;
    if (is_true(a)) return neg(b);
    if (is_true(b)) return neg(a);
    if (a == b) return neg(true_);
    if (a == neg(b)) return true_;
    Lit r = fresh();
    solver_.add_clause({neg(r), a, b});
    solver_.add_clause({neg(r), neg(a), neg(b)});
    solver_.add_clause({r, neg(a), b});
    solver_.add_clause({r, a, neg(b)});
    return r;
}

Lit BitBlaster::mk_ite(Lit c, Lit a, Lit b) {
    if (is_true(c)) return a;
    if (is_false(c)) return b;
    if (a == b) return a;
    if (is_true(a)) return mk_or(c, b);
    if (is_false(a)) return mk_and(neg(c), b);
    if (is_true(b)) return mk_or(neg(c), a);
    if (is_false(b)) return mk_and(c, a);
    Lit r = fresh();
    solver_.add_clause({neg(c), neg(a), r});
    solver_.add_clause({neg(c), a, neg(r)});
    solver_.add_clause({c, neg(b), r});
    solver_.add_clause({c, b, neg(r)});
    solver_.add_clause({neg(a), neg(b), r});
    solver_.add_clause({a, b, neg(r)});
    return r;
}

Lit BitBlaster::mk_eq(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    std::vector<Lit> same;
    for (size_t i = 0; i < a.size(); ++i) same.push_back(neg(mk_xor(a[i], b[i])));
    return mk_and(same);
}

// a < b, scanning from the least significant bit.
Lit BitBlaster::mk_ult(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    Lit lt = neg(true_);
    for (size_t i = 0; i < a.size(); ++i) {
        Lit bit_lt = mk_and(neg(a[i]), b[i]);
        Lit bit_eq = neg(mk_xor(a[i], b[i]));
        lt = mk_or(bit_lt, mk_and(bit_eq, lt));
    }
    return lt;
}

std::vector<Lit> BitBlaster::add(const std::vector<Lit>& a, const std::vector<Lit>& b, Lit carry) {
    std::vector<Lit> out;
    for (size_t i = 0; i < a.size(); ++i) {
        Lit t = mk_xor(a[i], b[i]);
        out.push_back(mk_xor(t, carry));
        carry = mk_or(mk_and(a[i], b[i]), mk_and(t, carry));
    }
    return out;
}

std::vector<Lit> BitBlaster::mul(const std::vector<Lit>& a, const std::vector<Lit>& b) {
    size_t w = a.size();
    std::vector<Lit> acc(w, neg(true_));
    for (size_t i = 0; i < w; ++i) {
        std::vector<Lit> partial(w, neg(true_));
        for (size_t j = 0; j + i < w; ++j) partial[i + j] = mk_and(a[j], b[i]);
        acc = add(acc, partial, neg(true_));
    }
    return acc;
}

std::vector<Lit> BitBlaster::shift(const std::vector<Lit>& a, const std::vector<Lit>& b, bool left) {
    size_t w = a.size();
    std::vector<Lit> cur = a;
    Lit overflow = neg(true_);
    for (size_t k = 0; k < b.size(); ++k) {
        if (k >= 63 || (uint64_t(1) << k) >= w) {
            overflow = mk_or(overflow, b[k]);
            continue;
        }
        size_t amount = size_t(1) << k;
        std::vector<Lit> next(w);
        for (size_t i = 0; i < w; ++i) {
            Lit moved;
            if (left)
                moved = i >= amount ? cur[i - amount] : neg(true_);
            else
                moved = i + amount < w ? cur[i + amount] : neg(true_);
            next[i] = mk_ite(b[k], moved, cur[i]);
        }
        cur = std::move(next);
    }
    for (auto& l : cur) l = mk_and(neg(overflow), l);
    return cur;
}

const std::vector<Lit>& BitBlaster::bits(Term t) {
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    blast(t);
    return cache_.at(t);
}

Lit BitBlaster::lit(Term t) {
    if (!tm_.is_bool(t)) throw std::invalid_argument("lit() of a bit-vector term");
    return bits(t)[0];
}

void BitBlaster::blast(Term root) {
    // Iterative post-order so deep terms do not exhaust the stack.
    std::vector<std::pair<Term, bool>> stack{{root, false}};
    while (!stack.empty()) {
        auto [t, expanded] = stack.back();
        stack.pop_back();
        if (cache_.count(t)) continue;
        const Node n = tm_.node(t);
        if (!expanded) {
            stack.push_back({t, true});
            for (Term a : n.args)
                if (!cache_.count(a)) stack.push_back({a, false});
            continue;
        }
        auto arg = [&](size_t i) -> const std::vector<Lit>& { return cache_.at(n.args[i]); };
        std::vector<Lit> out;
        unsigned w = n.width ? n.width : 1;
        switch (n.kind) {
            case Kind::Const:
                for (unsigned i = 0; i < w; ++i) out.push_back((n.value >> i) & 1 ? true_ : neg(true_));
                break;
            case Kind::Var:
                for (unsigned i = 0; i < w; ++i) out.push_back(fresh());
                break;
            case Kind::Not: out = {neg(arg(0)[0])}; break;
            case Kind::And:
            case Kind::Or: {
                std::vector<Lit> ls;
                for (size_t i = 0; i < n.args.size(); ++i) ls.push_back(arg(i)[0]);
                out = {n.kind == Kind::And ? mk_and(ls) : mk_or(ls)};
                break;
            }
            case Kind::Ite: {
                Lit c = arg(0)[0];
                for (size_t i = 0; i < arg(1).size(); ++i) out.push_back(mk_ite(c, arg(1)[i], arg(2)[i]));
                break;
            }
            case Kind::Eq: out = {mk_eq(arg(0), arg(1))}; break;
            case Kind::BvNot:
                for (Lit l : arg(0)) out.push_back(neg(l));
                break;
            case Kind::BvAnd:
                for (size_t i = 0; i < w; ++i) out.push_back(mk_and(arg(0)[i], arg(1)[i]));
                break;
            case Kind::BvOr:
                for (size_t i = 0; i < w; ++i) out.push_back(mk_or(arg(0)[i], arg(1)[i]));
                break;
            case Kind::BvXor:
                for (size_t i = 0; i < w; ++i) out.push_back(mk_xor(arg(0)[i], arg(1)[i]));
                break;
            case Kind::BvAdd: out = add(arg(0), arg(1), neg(true_)); break;
            case Kind::BvSub: {
                std::vector<Lit> nb;
                for (Lit l : arg(1)) nb.push_back(neg(l));
                out = add(arg(0), nb, true_);
                break;
            }
            case Kind::BvMul: out = mul(arg(0), arg(1)); break;
            case Kind::BvShl: out = shift(arg(0), arg(1), true); break;
            case Kind::BvLshr: out = shift(arg(0), arg(1), false); break;
            case Kind::BvUlt: out = {mk_ult(arg(0), arg(1))}; break;
            case Kind::BvUle: out = {neg(mk_ult(arg(1), arg(0)))}; break;
            case Kind::Concat:
                out = arg(1);
                out.insert(out.end(), arg(0).begin(), arg(0).end());
                break;
            case Kind::Extract:
                out.assign(arg(0).begin() + static_cast<long>(n.value), arg(0).begin() + static_cast<long>(n.value + w));
                break;
            case Kind::ZeroExt:
                out = arg(0);
                out.resize(w, neg(true_));
                break;
            case Kind::Apply: {
                for (unsigned i = 0; i < w; ++i) out.push_back(fresh());
                cache_[t] = out;
                auto& previous = applications_[n.symbol];
                for (Term other : previous) {
                    const Node& o = tm_.node(other);
                    if (o.args.size() != n.args.size() || o.width != n.width) continue;
                    std::vector<Lit> clause;
                    bool comparable = true;
                    for (size_t i = 0; i < n.args.size(); ++i) {
                        if (tm_.width(o.args[i]) != tm_.width(n.args[i])) {
                            comparable = false;
                            break;
                        }
                        clause.push_back(neg(mk_eq(cache_.at(o.args[i]), arg(i))));
                    }
                    if (!comparable) continue;
                    clause.push_back(mk_eq(cache_.at(other), out));
                    solver_.add_clause(clause);
                }
                previous.push_back(t);
                break;
            }
        }
        cache_[t] = std::move(out);
    }
}

uint64_t BitBlaster::model_value(Term t) {
    const auto& bs = bits(t);
    uint64_t v = 0;
    for (size_t i = 0; i < bs.size() && i < 64; ++i)
        if (solver_.model_value_lit(bs[i])) v |= uint64_t(1) << i;
    return v;
}

}  // namespace ctlive::smt
