#include "ctlive/vcgen.hpp"

#include <algorithm>
#include <functional>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ctlive/bitblast.hpp"
#include "ctlive/error.hpp"
#include "ctlive/sat.hpp"
#include "ctlive/value.hpp"

namespace ctlive {

using smt::Kind;
using smt::Term;
using smt::TermManager;

namespace {

const char* const kIssued = "issued";

// Symbolic execution of one cycle: blocking writes update the environment
// under their guard, non-blocking writes are collected and applied at the
// end, and a wire always reads as its right-hand side over the current
// environment (continuous assignments run before any further step).
class CycleCompiler {
public:
    CycleCompiler(TermManager& tm, const Program& p, const VcOptions& opt, std::vector<Term>& inputs)
        : tm_(tm), p_(p), opt_(opt), inputs_(inputs) {
        for (const auto& proc : p.processes)
            for (const auto& site : assignments(proc.body))
                if (site.kind == AssignKind::Continuous) wire_rhs_[site.lhs] = site.stmt->expr;
    }

    std::map<std::string, Term> env;

    void run() {
        std::vector<const Process*> order;
        for (const auto& proc : p_.processes)
            if (proc.kind == ProcessKind::Sequential) order.push_back(&proc);
        std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });
        for (const auto* proc : order) exec(proc->body, tm_.tru());
        for (auto& [x, fv] : nb_) {
            env[x] = tm_.mk_ite(fv.first, fv.second, env.at(x));
        }
    }

    Term expr(const Expr& e) {
        switch (e.kind()) {
            case Expr::Kind::Var: return read(e.name());
            case Expr::Kind::Const: {
                unsigned w = e.const_width() ? e.const_width() : bit_length(e.value());
                return tm_.bv(e.value() & smt::mask(w), w);
            }
            case Expr::Kind::App: return app(e);
        }
        return tm_.bv(0, 1);
    }

private:
    Term read(const std::string& name) {
        const VarInfo& info = p_.var(name);
        if (info.is_register()) return env.at(name);
        if (auto it = wire_cache_.find(name); it != wire_cache_.end()) return it->second;
        Term t;
        if (auto it = wire_rhs_.find(name); it != wire_rhs_.end()) {
            t = tm_.resize(expr(it->second), info.width);
        } else {
            t = tm_.var(name + "!undriven", info.width);
            if (std::find(inputs_.begin(), inputs_.end(), t) == inputs_.end()) inputs_.push_back(t);
        }
        wire_cache_[name] = t;
        return t;
    }

    Term app(const Expr& e) {
        const std::string& name = e.name();
        const auto& args = e.args();
        if (name == "slice" && args.size() == 3 && args[1].is_const() && args[2].is_const()) {
            Term a = expr(args[0]);
            uint64_t hi = args[1].value(), lo = args[2].value();
            unsigned w = result_width("slice", {tm_.width(a)}, hi, lo);
            unsigned wa = tm_.width(a);
            if (lo >= wa) return tm_.bv(0, w);
            unsigned take = std::min<unsigned>(w, wa - static_cast<unsigned>(lo));
            return tm_.resize(tm_.extract(a, static_cast<unsigned>(lo), take), w);
        }
        std::vector<Term> xs;
        std::vector<unsigned> ws;
        for (const auto& a : args) {
            xs.push_back(expr(a));
            ws.push_back(tm_.width(xs.back()));
        }
        Op op = op_of_symbol(name);
        unsigned w = result_width(name, ws);
        size_t need = 1;
        switch (op) {
            case Op::Eq: case Op::Ne: case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
            case Op::Shl: case Op::Shr: need = 2; break;
            case Op::Ite: need = 3; break;
            default: break;
        }
        bool wide = !opt_.interpret_all && ((op == Op::Mul && w > opt_.uf_mul_width) ||
                                            ((op == Op::Add || op == Op::Sub) && w > opt_.uf_add_width));
        if (op == Op::Uninterpreted || wide || xs.size() < need || name == "slice") return tm_.apply(name, xs, w);

        auto ext = [&](Term t, unsigned to) { return tm_.resize(t, to); };
        auto fold = [&](Kind k) {
            Term acc = ext(xs[0], w);
            for (size_t i = 1; i < xs.size(); ++i) acc = tm_.bv_binary(k, acc, ext(xs[i], w));
            return acc;
        };
        auto cmp = [&]() {
            unsigned m = std::max(ws[0], ws[1]);
            return std::pair{ext(xs[0], m), ext(xs[1], m)};
        };
        switch (op) {
            case Op::Eq: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.mk_eq(a, b)); }
            case Op::Ne: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.mk_not(tm_.mk_eq(a, b))); }
            case Op::Lt: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.bv_ult(a, b)); }
            case Op::Le: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.bv_ule(a, b)); }
            case Op::Gt: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.bv_ult(b, a)); }
            case Op::Ge: { auto [a, b] = cmp(); return tm_.to_bv1(tm_.bv_ule(b, a)); }
            case Op::Add: return fold(Kind::BvAdd);
            case Op::Mul: return fold(Kind::BvMul);
            case Op::Sub:
                if (xs.size() == 1) return tm_.bv_binary(Kind::BvSub, tm_.bv(0, w), ext(xs[0], w));
                return tm_.bv_binary(Kind::BvSub, ext(xs[0], w), ext(xs[1], w));
            case Op::BitAnd: return fold(Kind::BvAnd);
            case Op::BitOr: return fold(Kind::BvOr);
            case Op::BitXor: return fold(Kind::BvXor);
            case Op::BitNot: return tm_.bv_not(ext(xs[0], w));
            case Op::LogAnd:
            case Op::LogOr: {
                std::vector<Term> bs;
                for (Term x : xs) bs.push_back(tm_.truth(x));
                return tm_.to_bv1(op == Op::LogAnd ? tm_.mk_and(bs) : tm_.mk_or(bs));
            }
            case Op::LogNot: return tm_.to_bv1(tm_.mk_not(tm_.truth(xs[0])));
            case Op::Shl:
            case Op::Shr: {
                unsigned m = std::max(ws[0], ws[1]);
                Term r = tm_.bv_binary(op == Op::Shl ? Kind::BvShl : Kind::BvLshr, ext(xs[0], m), ext(xs[1], m));
                return tm_.resize(r, ws[0]);
            }
            case Op::Ite: return tm_.mk_ite(tm_.truth(xs[0]), ext(xs[1], w), ext(xs[2], w));
            case Op::Concat: {
                Term acc = xs[0];
                for (size_t i = 1; i < xs.size(); ++i) acc = tm_.concat(acc, xs[i]);
                return ext(acc, w);
            }
            default: break;
        }
        return tm_.apply(name, xs, w);
    }

    void exec(const Stmt& s, Term guard) {
        switch (s.kind) {
            case Stmt::Kind::Skip: return;
            case Stmt::Kind::Seq:
                for (const auto& c : s.children) exec(c, guard);
                return;
            case Stmt::Kind::If: {
                Term c = tm_.truth(expr(s.expr));
                exec(s.then_branch(), tm_.mk_and(guard, c));
                exec(s.else_branch(), tm_.mk_and(guard, tm_.mk_not(c)));
                return;
            }
            case Stmt::Kind::Assign: break;
        }
        if (s.assign_kind == AssignKind::Continuous) return;
        const VarInfo& info = p_.var(s.lhs);
        if (!info.is_register()) throw Error("procedural assignment to wire '" + s.lhs + "'");
        Term v = tm_.resize(expr(s.expr), info.width);
        if (s.assign_kind == AssignKind::Blocking) {
            env[s.lhs] = tm_.mk_ite(guard, v, env.at(s.lhs));
            wire_cache_.clear();
        } else if (auto it = nb_.find(s.lhs); it == nb_.end()) {
            nb_[s.lhs] = {guard, v};
        } else {
            it->second = {tm_.mk_or(guard, it->second.first), tm_.mk_ite(guard, v, it->second.second)};
        }
    }

    TermManager& tm_;
    const Program& p_;
    const VcOptions& opt_;
    std::vector<Term>& inputs_;
    std::map<std::string, Expr> wire_rhs_;
    std::map<std::string, Term> wire_cache_;
    std::map<std::string, std::pair<Term, Term>> nb_;
};

Term formula_term(TermManager& tm, const Formula& f, const std::function<Term(const std::string&)>& var) {
    std::vector<Term> conj;
    auto sides = [](Side s) { return s == Side::Both ? std::vector<Side>{Side::L, Side::R} : std::vector<Side>{s}; };
    for (const auto& a : f.atoms) {
        switch (a.kind) {
            case Atom::Kind::EqLR: conj.push_back(tm.mk_eq(var(side_name(a.x, Side::L)), var(side_name(a.x, Side::R)))); break;
            case Atom::Kind::EqConst:
                for (Side s : sides(a.side)) {
                    Term x = var(side_name(a.x, s));
                    conj.push_back(tm.mk_eq(x, tm.bv(a.value & smt::mask(tm.width(x)), tm.width(x))));
                }
                break;
            case Atom::Kind::EqVars:
                for (Side s : sides(a.side)) {
                    Term x = var(side_name(a.x, s)), y = var(side_name(a.y, s));
                    unsigned m = std::max(tm.width(x), tm.width(y));
                    conj.push_back(tm.mk_eq(tm.resize(x, m), tm.resize(y, m)));
                }
                break;
        }
    }
    return tm.mk_and(conj);
}

std::string eq_text(const std::string& a, const std::string& b) { return a + " = " + b; }

}  // namespace

Term TransitionFormula::pre_var(const std::string& name) const { return pre.at(index(name)); }
Term TransitionFormula::post_var(const std::string& name) const { return post.at(index(name)); }

size_t TransitionFormula::index(const std::string& name) const {
    for (size_t i = 0; i < state.size(); ++i)
        if (state[i].name == name) return i;
    throw Error("'" + name + "' is not a state variable");
}

TransitionFormula compile_cycle(const ProductProgram& pp, const VcOptions& opt) {
    const Program& original = pp.base.original;
    wire_topological_order(original);  // throws CombinationalLoop
    wire_topological_order(pp.program);

    TransitionFormula tf;
    tf.tm = std::make_shared<TermManager>();
    TermManager& tm = *tf.tm;
    tf.registers = original.registers();
    tf.sources = pp.sources;
    std::set<std::string> sources(pp.sources.begin(), pp.sources.end());
    for (const auto& x : tf.registers) {
        unsigned w = original.var(x).width;
        tf.state.push_back({side_name(x, Side::L), w});
        tf.state.push_back({side_name(x, Side::R), w});
        tf.state.push_back({side_name(shadow_name(x), Side::L), 1});
        tf.state.push_back({side_name(shadow_name(x), Side::R), 1});
    }
    tf.state.push_back({kIssued, 1});
    for (const auto& sv : tf.state) {
        tf.pre.push_back(tm.var(sv.name, sv.width));
        tf.post.push_back(tm.var(sv.name + "'", sv.width));
    }
    tf.issue = tm.var("issue'", 0);
    tf.inputs.push_back(tf.issue);

    CycleCompiler cc(tm, pp.program, opt, tf.inputs);
    for (size_t i = 0; i + 1 < tf.state.size(); ++i) cc.env[tf.state[i].name] = tf.pre[i];
    cc.run();

    Term issue_bit = tm.to_bv1(tf.issue);
    Term not_issue_bit = tm.to_bv1(tm.mk_not(tf.issue));
    for (const auto& x : tf.registers) {
        bool source = sources.count(x) != 0;
        // Same order as the state: x$L, x$R, live$x$L, live$x$R.
        for (Side s : {Side::L, Side::R}) {
            std::string v = side_name(x, s);
            if (source) {
                tf.next.push_back(tm.var(v + "!in", original.var(x).width));
                tf.inputs.push_back(tf.next.back());
            } else {
                tf.next.push_back(cc.env.at(v));
            }
        }
        for (Side s : {Side::L, Side::R}) {
            std::string sh = side_name(shadow_name(x), s);
            tf.next.push_back(source ? issue_bit : tm.bv_binary(Kind::BvAnd, cc.env.at(sh), not_issue_bit));
        }
    }
    Term issued = tf.pre.back();
    tf.next.push_back(tm.bv_binary(Kind::BvOr, issued, issue_bit));

    std::vector<Term> conj;
    for (size_t i = 0; i < tf.post.size(); ++i) conj.push_back(tm.mk_eq(tf.post[i], tf.next[i]));
    conj.push_back(tm.mk_implies(tf.issue, tm.mk_not(tm.truth(issued))));
    tf.constraint = tm.mk_and(conj);
    return tf;
}

std::string clause_name(HornClause::Kind k) {
    switch (k) {
        case HornClause::Kind::Init: return "init";
        case HornClause::Kind::Step: return "step";
        case HornClause::Kind::Assert: return "assert";
    }
    return "";
}

HornSystem generate_horn(const ProductProgram& pp, const AnnotationSet& annots, const VcOptions& opt) {
    HornSystem hs;
    hs.trans = compile_cycle(pp, opt);
    const TransitionFormula& tf = hs.trans;
    TermManager& tm = *tf.tm;
    const Program& original = pp.base.original;

    for (const auto* list : {&annots.initial_eq, &annots.always_eq})
        for (const auto& f : *list)
            for (const auto& v : f.vars())
                if (!original.has_var(v) || !original.var(v).is_register())
                    throw Error("assumptions may only mention registers; '" + v + "' is not one");

    auto pre = [&](const std::string& n) { return tf.pre_var(n); };
    auto post = [&](const std::string& n) { return tf.post_var(n); };

    std::vector<Term> init;
    for (const auto& f : annots.initial_eq) init.push_back(formula_term(tm, f, pre));
    std::set<std::string> sources(tf.sources.begin(), tf.sources.end());
    Term issued = tf.pre.back();
    for (const auto& x : tf.registers)
        for (Side s : {Side::L, Side::R}) {
            Term sh = tf.pre_var(side_name(shadow_name(x), s));
            init.push_back(tm.mk_eq(sh, sources.count(x) ? issued : tm.bv(0, 1)));
        }
    hs.init = tm.mk_and(init);

    std::vector<Term> chan_pre, chan_post;
    for (const auto& f : annots.always_eq) {
        chan_pre.push_back(formula_term(tm, f, pre));
        chan_post.push_back(formula_term(tm, f, post));
    }
    hs.channel_pre = tm.mk_and(chan_pre);
    hs.channel_post = tm.mk_and(chan_post);

    std::vector<Term> asserts;
    for (const auto& [l, r] : pp.assertions) {
        // Wires read as reset at labels, so only register sinks constrain.
        std::string sink = l.substr(5, l.size() - 7);
        if (!original.has_var(sink) || !original.var(sink).is_register()) continue;
        hs.assertion_pairs.push_back({l, r});
        asserts.push_back(tm.mk_eq(tf.pre_var(l), tf.pre_var(r)));
    }
    hs.assertion = tm.mk_and(asserts);

    hs.clauses.push_back({HornClause::Kind::Init, {hs.init}, 0});
    hs.clauses.push_back({HornClause::Kind::Step, {hs.channel_pre, tf.constraint, hs.channel_post}, 0});
    hs.clauses.push_back({HornClause::Kind::Assert, {hs.channel_pre}, hs.assertion});
    return hs;
}

std::vector<Hint> parse_hints(const std::string& text, const std::string& filename) {
    static const std::regex line_re(R"(^\s*live\s+([A-Za-z_][\w$]*)\s*=\s*live\s+([A-Za-z_][\w$]*)\s*;?\s*$)");
    std::vector<Hint> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line.compare(first, 2, "//") == 0 || line[first] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (!std::regex_match(line, m, line_re))
            throw SyntaxError("expected a hint of the form 'live x = live y'",
                              SourceSpan{filename, lineno, static_cast<int>(first) + 1, static_cast<int>(line.size()) + 1});
        out.push_back({m[1], m[2]});
    }
    return out;
}

PredicateUniverse predicate_universe(const HornSystem& hs, const std::vector<Hint>& hints) {
    PredicateUniverse pu;
    const TransitionFormula& tf = hs.trans;
    if (!tf.tm) return pu;
    TermManager& tm = *tf.tm;
    std::set<std::string> seen;
    auto add = [&](const std::string& a, const std::string& b, bool zero, bool hint) {
        std::string text = eq_text(a, zero ? "0" : b);
        if (!seen.insert(text).second) return;
        Predicate p;
        p.text = text;
        p.hint = hint;
        p.pre = tm.mk_eq(tf.pre_var(a), zero ? tm.bv(0, 1) : tf.pre_var(b));
        p.post = tm.mk_eq(tf.post_var(a), zero ? tm.bv(0, 1) : tf.post_var(b));
        pu.predicates.push_back(p);
    };
    for (const auto& x : tf.registers) {
        std::string sl = side_name(shadow_name(x), Side::L), sr = side_name(shadow_name(x), Side::R);
        add(side_name(x, Side::L), side_name(x, Side::R), false, false);
        add(sl, sr, false, false);
        add(sl, "", true, false);
        add(sr, "", true, false);
    }
    std::set<std::string> regs(tf.registers.begin(), tf.registers.end());
    for (const auto& h : hints) {
        for (const auto& v : {h.x, h.y})
            if (!regs.count(v)) throw Error("hint mentions '" + v + "', which is not a register");
        for (Side s : {Side::L, Side::R})
            add(side_name(shadow_name(h.x), s), side_name(shadow_name(h.y), s), false, true);
    }
    return pu;
}

std::string result_name(VerifierVerdict::Result r) {
    return r == VerifierVerdict::Result::Verified ? "Verified" : "CannotProve";
}

nlohmann::json VerifierVerdict::to_json() const {
    nlohmann::json j;
    j["result"] = result_name(result);
    j["invariant"] = invariant;
    nlohmann::json d = nlohmann::json::array();
    for (const auto& [p, c] : dropped) d.push_back({{"predicate", p}, {"clause", c}});
    j["dropped"] = d;
    j["failing_clause"] = failing_clause;
    j["iterations"] = iterations;
    j["queries"] = queries;
    j["unknown_answers"] = unknown_answers;
    return j;
}

namespace {

// Incremental checker: one propositional instance for every query, with
// the clause bodies behind activation literals.
VerifierVerdict houdini_builtin(const HornSystem& hs, const PredicateUniverse& pu) {
    VerifierVerdict v;
    TermManager& tm = *hs.trans.tm;
    sat::Solver s;
    smt::BitBlaster bb(tm, s);
    auto activation = [&](std::vector<Term> terms) {
        sat::Lit a = sat::mk_lit(s.new_var());
        for (Term t : terms) s.add_clause({sat::neg(a), bb.lit(t)});
        return a;
    };
    sat::Lit a_init = activation({hs.init});
    sat::Lit a_step = activation({hs.channel_pre, hs.trans.constraint, hs.channel_post});
    sat::Lit a_chan = activation({hs.channel_pre});
    sat::Lit assertion = bb.lit(hs.assertion);

    const auto& preds = pu.predicates;
    std::vector<sat::Lit> pre, post;
    for (const auto& p : preds) {
        pre.push_back(bb.lit(p.pre));
        post.push_back(bb.lit(p.post));
    }
    std::vector<bool> alive(preds.size(), true);
    auto drop_falsified = [&](const std::vector<sat::Lit>& lits, const char* clause) {
        for (size_t j = 0; j < preds.size(); ++j)
            if (alive[j] && !s.model_value_lit(lits[j])) {
                alive[j] = false;
                v.dropped.push_back({preds[j].text, clause});
            }
    };
    auto alive_pre = [&]() {
        std::vector<sat::Lit> out;
        for (size_t j = 0; j < preds.size(); ++j)
            if (alive[j]) out.push_back(pre[j]);
        return out;
    };

    for (size_t i = 0; i < preds.size(); ++i) {
        if (!alive[i]) continue;
        ++v.queries;
        if (s.solve({a_init, sat::neg(pre[i])}) == sat::Result::Sat) drop_falsified(pre, "init");
    }
    for (bool changed = true; changed;) {
        changed = false;
        ++v.iterations;
        for (size_t i = 0; i < preds.size(); ++i) {
            if (!alive[i]) continue;
            auto assumptions = alive_pre();
            assumptions.push_back(a_step);
            assumptions.push_back(sat::neg(post[i]));
            ++v.queries;
            if (s.solve(assumptions) == sat::Result::Sat) {
                drop_falsified(post, "step");
                changed = true;
            }
        }
    }
    auto assumptions = alive_pre();
    assumptions.push_back(a_chan);
    assumptions.push_back(sat::neg(assertion));
    ++v.queries;
    if (s.solve(assumptions) == sat::Result::Unsat) {
        v.result = VerifierVerdict::Result::Verified;
    } else {
        v.failing_clause = "assert";
        for (const auto& [l, r] : hs.assertion_pairs)
            if (bb.model_value(hs.trans.pre_var(l)) != bb.model_value(hs.trans.pre_var(r))) {
                v.failing_clause += " " + eq_text(l, r);
                break;
            }
    }
    for (size_t j = 0; j < preds.size(); ++j)
        if (alive[j]) v.invariant.push_back(preds[j].text);
    return v;
}

VerifierVerdict houdini_external(const HornSystem& hs, const PredicateUniverse& pu, smt::Backend& backend) {
    VerifierVerdict v;
    TermManager& tm = *hs.trans.tm;
    const auto& preds = pu.predicates;
    std::vector<bool> alive(preds.size(), true);
    auto holds = [&](std::vector<Term> query) {
        ++v.queries;
        auto a = backend.check(tm, query, nullptr);
        if (a == smt::Answer::Unknown) v.unknown_answers = true;
        return a == smt::Answer::Unsat;
    };
    auto alive_pre = [&]() {
        std::vector<Term> out;
        for (size_t j = 0; j < preds.size(); ++j)
            if (alive[j]) out.push_back(preds[j].pre);
        return out;
    };
    for (size_t i = 0; i < preds.size(); ++i)
        if (!holds({hs.init, tm.mk_not(preds[i].pre)})) {
            alive[i] = false;
            v.dropped.push_back({preds[i].text, "init"});
        }
    for (bool changed = true; changed;) {
        changed = false;
        ++v.iterations;
        for (size_t i = 0; i < preds.size(); ++i) {
            if (!alive[i]) continue;
            auto q = alive_pre();
            q.insert(q.end(), {hs.channel_pre, hs.trans.constraint, hs.channel_post, tm.mk_not(preds[i].post)});
            if (!holds(q)) {
                alive[i] = false;
                v.dropped.push_back({preds[i].text, "step"});
                changed = true;
            }
        }
    }
    auto q = alive_pre();
    q.insert(q.end(), {hs.channel_pre, tm.mk_not(hs.assertion)});
    if (holds(q)) {
        v.result = VerifierVerdict::Result::Verified;
    } else {
        v.failing_clause = "assert";
        for (const auto& [l, r] : hs.assertion_pairs) {
            auto q2 = alive_pre();
            q2.insert(q2.end(), {hs.channel_pre, tm.mk_not(tm.mk_eq(hs.trans.pre_var(l), hs.trans.pre_var(r)))});
            if (!holds(q2)) {
                v.failing_clause += " " + eq_text(l, r);
                break;
            }
        }
    }
    for (size_t j = 0; j < preds.size(); ++j)
        if (alive[j]) v.invariant.push_back(preds[j].text);
    return v;
}

}  // namespace

VerifierVerdict houdini_solve(const HornSystem& hs, const PredicateUniverse& pu, smt::Backend* backend) {
    if (!hs.trans.tm) {
        VerifierVerdict v;
        v.result = VerifierVerdict::Result::Verified;
        return v;
    }
    if (!backend || dynamic_cast<smt::BuiltinBackend*>(backend)) return houdini_builtin(hs, pu);
    return houdini_external(hs, pu, *backend);
}

std::string emit_smtlib(const HornSystem& hs) {
    std::ostringstream os;
    os << "(set-logic HORN)\n";
    if (hs.trans.tm && !hs.clauses.empty()) {
        const TransitionFormula& tf = hs.trans;
        const TermManager& tm = *tf.tm;
        os << "(declare-fun Inv (";
        for (size_t i = 0; i < tf.state.size(); ++i) os << (i ? " " : "") << smt::smt_sort(tf.state[i].width);
        os << ") Bool)\n";
        std::vector<Term> all;
        for (const auto& c : hs.clauses) {
            all.insert(all.end(), c.body.begin(), c.body.end());
            if (c.head) all.push_back(c.head);
        }
        os << smt::smt_function_declarations(tm, all);
        auto inv = [&](const std::vector<Term>& vars) {
            std::string s = "(Inv";
            for (Term t : vars) s += " " + smt::smt_symbol(tm.symbol_name(tm.node(t).symbol));
            return s + ")";
        };
        for (const auto& c : hs.clauses) {
            std::vector<Term> bound = tf.pre;
            if (c.kind == HornClause::Kind::Step) bound.insert(bound.end(), tf.post.begin(), tf.post.end());
            std::vector<Term> mentioned = c.body;
            if (c.head) mentioned.push_back(c.head);
            for (Term v : tm.vars_of(mentioned))
                if (std::find(bound.begin(), bound.end(), v) == bound.end()) bound.push_back(v);
            os << "(assert (forall (";
            for (size_t i = 0; i < bound.size(); ++i)
                os << (i ? " " : "") << "(" << smt::smt_symbol(tm.symbol_name(tm.node(bound[i]).symbol)) << " "
                   << smt::smt_sort(tm.width(bound[i])) << ")";
            os << ")\n  (=> ";
            Term body = const_cast<TermManager&>(tm).mk_and(c.body);
            std::string body_text = smt::smt_term(tm, body);
            switch (c.kind) {
                case HornClause::Kind::Init: os << body_text << " " << inv(tf.pre); break;
                case HornClause::Kind::Step: os << "(and " << inv(tf.pre) << " " << body_text << ") " << inv(tf.post); break;
                case HornClause::Kind::Assert:
                    os << "(and " << inv(tf.pre) << " " << body_text << ") " << smt::smt_term(tm, c.head);
                    break;
            }
            os << ")))\n";
        }
    }
    os << "(check-sat)\n(exit)\n";
    return os.str();
}

nlohmann::json BmcWitness::to_json() const {
    return {{"t", t}, {"cycle", cycle}, {"sink", sink}, {"depth", depth}, {"left", left.to_json()}, {"right", right.to_json()}};
}

std::optional<BmcWitness> bmc_refute(const ProductProgram& pp, const AnnotationSet& annots, size_t depth,
                                     unsigned width) {
    if (depth == 0) return std::nullopt;
    VcOptions opt;
    opt.interpret_all = true;
    HornSystem hs = generate_horn(pp, annots, opt);
    const TransitionFormula& tf = hs.trans;
    TermManager& tm = *tf.tm;
    const Program& original = pp.base.original;
    std::set<std::string> sources(tf.sources.begin(), tf.sources.end());

    // states[k][i]: state variable i at label k.
    std::vector<std::vector<Term>> states(depth);
    for (size_t i = 0; i < tf.state.size(); ++i)
        states[0].push_back(tm.var(tf.state[i].name + "@0", tf.state[i].width));
    std::vector<Term> constraints, issues{tm.truth(states[0].back())};
    auto at = [&](Term t, size_t k) {
        std::unordered_map<Term, Term> m;
        for (size_t i = 0; i < tf.pre.size(); ++i) m[tf.pre[i]] = states[k][i];
        return tm.substitute(t, m);
    };
    for (size_t k = 0; k + 1 < depth; ++k) {
        std::unordered_map<Term, Term> m;
        for (size_t i = 0; i < tf.pre.size(); ++i) m[tf.pre[i]] = states[k][i];
        for (Term in : tf.inputs)
            m[in] = tm.var(tm.symbol_name(tm.node(in).symbol) + "@" + std::to_string(k + 1), tm.width(in));
        for (Term n : tf.next) states[k + 1].push_back(tm.substitute(n, m));
        Term issue = m.at(tf.issue);
        issues.push_back(issue);
        constraints.push_back(tm.mk_implies(issue, tm.mk_not(tm.truth(states[k].back()))));
    }
    // Values range over [0, 2^width): registers initially, sources every cycle.
    std::vector<Term> free_values;
    for (const auto& x : tf.registers)
        for (Side s : {Side::L, Side::R}) {
            size_t i = tf.index(side_name(x, s));
            for (size_t k = 0; k < depth; ++k) {
                if (k > 0 && !sources.count(x)) break;
                free_values.push_back(states[k][i]);
            }
        }
    for (Term v : free_values)
        if (tm.width(v) > width) constraints.push_back(tm.mk_eq(tm.extract(v, width, tm.width(v) - width), tm.bv(0, tm.width(v) - width)));
    constraints.push_back(at(hs.init, 0));
    std::vector<Term> goal;
    for (size_t k = 0; k < depth; ++k) {
        constraints.push_back(at(hs.channel_pre, k));
        goal.push_back(tm.mk_not(at(hs.assertion, k)));
    }
    constraints.push_back(tm.mk_or(goal));

    sat::Solver s;
    smt::BitBlaster bb(tm, s);
    for (Term c : constraints)
        if (!s.add_clause({bb.lit(c)})) return std::nullopt;
    for (int attempt = 0; attempt < 64; ++attempt) {
        if (s.solve() == sat::Result::Unsat) return std::nullopt;
        BmcWitness w;
        w.depth = depth;
        for (size_t k = 0; k < depth; ++k)
            if (s.model_value_lit(bb.lit(issues[k]))) {
                w.t = k;
                break;
            }
        std::vector<Term> block;
        for (const auto& x : tf.registers)
            for (Side side : {Side::L, Side::R}) {
                InputSchedule& sched = side == Side::L ? w.left : w.right;
                size_t i = tf.index(side_name(x, side));
                for (size_t k = 0; k < depth; ++k) {
                    if (k > 0 && !sources.count(x)) break;
                    uint64_t val = bb.model_value(states[k][i]);
                    if (sources.count(x))
                        sched.set(k, x, val);
                    else
                        sched.initial[x] = val;
                    block.push_back(tm.mk_eq(states[k][i], tm.bv(val, tm.width(states[k][i]))));
                }
            }
        for (size_t k = 0; k < depth; ++k) block.push_back(s.model_value_lit(bb.lit(issues[k])) ? issues[k] : tm.mk_not(issues[k]));
        try {
            Trace lt = run(original, annots, w.left, w.t, depth);
            Trace rt = run(original, annots, w.right, w.t, depth);
            for (size_t c = 0; c < depth; ++c) {
                for (const auto& sink : annots.sinks)
                    if (lt.live(c, sink) != rt.live(c, sink)) {
                        w.cycle = c;
                        w.sink = sink;
                        return w;
                    }
            }
        } catch (const GuardUnknown&) {
        }
        if (!s.add_clause({bb.lit(tm.mk_not(tm.mk_and(block)))})) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace ctlive
