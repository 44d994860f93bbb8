#include "ctlive/instrument.hpp"

#include <algorithm>

namespace ctlive {

std::string shadow_name(const std::string& var) { return "live$" + var; }

std::string side_name(const std::string& var, Side side) { return var + (side == Side::R ? "$R" : "$L"); }

namespace {

Expr join_shadows(const std::vector<std::string>& vars) {
    if (vars.empty()) return Expr::constant(0, 1);
    Expr e = Expr::var(shadow_name(vars[0]));
    for (size_t i = 1; i < vars.size(); ++i) e = Expr::app("||", {e, Expr::var(shadow_name(vars[i]))});
    return e;
}

Stmt shadow_assign(AssignKind kind, const std::string& lhs, Expr rhs) {
    switch (kind) {
        case AssignKind::Blocking: return Stmt::blocking(shadow_name(lhs), std::move(rhs));
        case AssignKind::NonBlocking: return Stmt::nonblocking(shadow_name(lhs), std::move(rhs));
        case AssignKind::Continuous: return Stmt::continuous(shadow_name(lhs), std::move(rhs));
    }
    return Stmt::skip();
}

// guards: variables of the enclosing conditions, outermost first.
Stmt instrument_stmt(const Stmt& s, const std::vector<std::string>& guards) {
    switch (s.kind) {
        case Stmt::Kind::Skip: return s;
        case Stmt::Kind::Assign: {
            std::vector<std::string> vars;
            for (const auto& v : free_vars(s.expr)) vars.push_back(v);
            for (const auto& g : guards)
                if (std::find(vars.begin(), vars.end(), g) == vars.end()) vars.push_back(g);
            return Stmt::seq({s, shadow_assign(s.assign_kind, s.lhs, join_shadows(vars))});
        }
        case Stmt::Kind::If: {
            std::vector<std::string> inner = guards;
            for (const auto& v : free_vars(s.expr))
                if (std::find(inner.begin(), inner.end(), v) == inner.end()) inner.push_back(v);
            return Stmt::ite(s.expr, instrument_stmt(s.then_branch(), inner), instrument_stmt(s.else_branch(), inner));
        }
        case Stmt::Kind::Seq: {
            std::vector<Stmt> out;
            for (const auto& c : s.children) out.push_back(instrument_stmt(c, guards));
            return Stmt::seq(std::move(out));
        }
    }
    return s;
}

std::vector<Stmt> top_level(const Stmt& s) {
    if (s.kind == Stmt::Kind::Seq) return s.children;
    if (s.kind == Stmt::Kind::Skip) return {};
    return {s};
}

}  // namespace

InstrumentedProgram instrument(const Program& program, const AnnotationSet& annots) {
    InstrumentedProgram ip;
    ip.original = program;
    ip.annots = annots;
    ip.program.vars = program.vars;
    for (const auto& [name, info] : program.vars) {
        ip.program.declare(shadow_name(name), info.storage, 1);
        ip.shadow[name] = shadow_name(name);
    }
    for (const auto& p : program.processes) {
        Process q = p;
        q.body = instrument_stmt(p.body, {});
        ip.program.processes.push_back(std::move(q));
    }
    return ip;
}

AnnotationSet ProductProgram::product_annotations() const {
    AnnotationSet a;
    for (const auto& s : sources) {
        a.sources.insert(side_name(s, Side::L));
        a.sources.insert(side_name(s, Side::R));
    }
    for (const auto& s : sinks) {
        a.sinks.insert(side_name(s, Side::L));
        a.sinks.insert(side_name(s, Side::R));
    }
    return a;
}

ProductProgram build_product(const InstrumentedProgram& ip, const AnnotationSet& annots) {
    ProductProgram pp;
    pp.base = ip;
    for (const auto& [name, info] : ip.program.vars) {
        pp.left[name] = side_name(name, Side::L);
        pp.right[name] = side_name(name, Side::R);
        pp.program.declare(pp.left[name], info.storage, info.width);
        pp.program.declare(pp.right[name], info.storage, info.width);
    }
    for (const auto& p : ip.program.processes) {
        std::vector<Stmt> body;
        for (const auto& s : top_level(p.body)) {
            body.push_back(rename(s, pp.left));
            body.push_back(rename(s, pp.right));
        }
        pp.program.processes.push_back(Process{p.id, p.kind, Stmt::seq(std::move(body))});
    }
    pp.sources.assign(annots.sources.begin(), annots.sources.end());
    pp.sinks.assign(annots.sinks.begin(), annots.sinks.end());
    pp.init = annots.initial_eq;
    pp.channel = annots.always_eq;
    for (const auto& s : pp.sinks)
        pp.assertions.push_back({side_name(shadow_name(s), Side::L), side_name(shadow_name(s), Side::R)});
    return pp;
}

Expr product_expr(const Formula& f) {
    std::vector<Expr> conj;
    auto sides = [](Side s) {
        return s == Side::Both ? std::vector<Side>{Side::L, Side::R} : std::vector<Side>{s};
    };
    for (const auto& a : f.atoms) {
        switch (a.kind) {
            case Atom::Kind::EqLR:
                conj.push_back(Expr::app("==", {Expr::var(side_name(a.x, Side::L)), Expr::var(side_name(a.x, Side::R))}));
                break;
            case Atom::Kind::EqConst:
                for (Side s : sides(a.side))
                    conj.push_back(Expr::app("==", {Expr::var(side_name(a.x, s)), Expr::constant(a.value)}));
                break;
            case Atom::Kind::EqVars:
                for (Side s : sides(a.side))
                    conj.push_back(Expr::app("==", {Expr::var(side_name(a.x, s)), Expr::var(side_name(a.y, s))}));
                break;
        }
    }
    if (conj.empty()) return Expr::constant(1, 1);
    Expr e = conj[0];
    for (size_t i = 1; i < conj.size(); ++i) e = Expr::app("&&", {e, conj[i]});
    return e;
}

}  // namespace ctlive
