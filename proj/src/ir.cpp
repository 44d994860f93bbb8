#include "ctlive/ir.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "ctlive/error.hpp"

namespace ctlive {

std::string SourceSpan::str() const {
    std::ostringstream os;
    os << (file.empty() ? "<input>" : file) << ":" << line << ":" << col_begin;
    return os.str();
}

SyntaxError::SyntaxError(const std::string& msg, SourceSpan span)
    : Error(span.str() + ": " + msg), bare_(msg), span_(std::move(span)) {}

// ---------------------------------------------------------------------------
// Expr

Expr Expr::var(std::string name) {
    return Expr(std::make_shared<const Node>(Node{Kind::Var, std::move(name), 0, 0, {}}));
}

Expr Expr::constant(uint64_t value, unsigned width) {
    return Expr(std::make_shared<const Node>(Node{Kind::Const, {}, value, width, {}}));
}

Expr Expr::app(std::string symbol, std::vector<Expr> args) {
    return Expr(std::make_shared<const Node>(Node{Kind::App, std::move(symbol), 0, 0, std::move(args)}));
}

Expr::Kind Expr::kind() const { return node_->kind; }
const std::string& Expr::name() const { return node_->name; }
uint64_t Expr::value() const { return node_->value; }
unsigned Expr::const_width() const { return node_->width; }
const std::vector<Expr>& Expr::args() const { return node_->args; }

bool operator==(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::Var: return a.name() == b.name();
        case Expr::Kind::Const: return a.value() == b.value() && a.const_width() == b.const_width();
        case Expr::Kind::App: return a.name() == b.name() && a.args() == b.args();
    }
    return false;
}

// ---------------------------------------------------------------------------
// Stmt

Stmt Stmt::skip() { return Stmt{}; }

static Stmt make_assign(AssignKind k, std::string lhs, Expr rhs) {
    Stmt s;
    s.kind = Stmt::Kind::Assign;
    s.assign_kind = k;
    s.lhs = std::move(lhs);
    s.expr = std::move(rhs);
    return s;
}

Stmt Stmt::blocking(std::string lhs, Expr rhs) { return make_assign(AssignKind::Blocking, std::move(lhs), std::move(rhs)); }
Stmt Stmt::nonblocking(std::string lhs, Expr rhs) {
    return make_assign(AssignKind::NonBlocking, std::move(lhs), std::move(rhs));
}
Stmt Stmt::continuous(std::string lhs, Expr rhs) {
    return make_assign(AssignKind::Continuous, std::move(lhs), std::move(rhs));
}

Stmt Stmt::ite(Expr cond, Stmt then_branch, Stmt else_branch) {
    Stmt s;
    s.kind = Kind::If;
    s.expr = std::move(cond);
    s.children.push_back(std::move(then_branch));
    s.children.push_back(std::move(else_branch));
    return s;
}

Stmt Stmt::seq(std::vector<Stmt> stmts) {
    std::vector<Stmt> flat;
    for (auto& s : stmts) {
        if (s.kind == Kind::Skip) continue;
        if (s.kind == Kind::Seq) {
            for (auto& c : s.children) flat.push_back(std::move(c));
        } else {
            flat.push_back(std::move(s));
        }
    }
    if (flat.empty()) return skip();
    if (flat.size() == 1) return std::move(flat.front());
    Stmt s;
    s.kind = Kind::Seq;
    s.children = std::move(flat);
    return s;
}

bool operator==(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Stmt::Kind::Skip: return true;
        case Stmt::Kind::Assign: return a.assign_kind == b.assign_kind && a.lhs == b.lhs && a.expr == b.expr;
        case Stmt::Kind::If: return a.expr == b.expr && a.children == b.children;
        case Stmt::Kind::Seq: return a.children == b.children;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Program

void Program::declare(const std::string& name, StorageClass storage, unsigned width) {
    vars[name] = VarInfo{name, storage, width};
}

const VarInfo& Program::var(const std::string& name) const {
    auto it = vars.find(name);
    if (it == vars.end()) throw Error("undeclared variable '" + name + "'");
    return it->second;
}

std::vector<std::string> Program::registers() const {
    std::vector<std::string> out;
    for (const auto& [n, v] : vars)
        if (v.is_register()) out.push_back(n);
    return out;
}

std::vector<std::string> Program::wires() const {
    std::vector<std::string> out;
    for (const auto& [n, v] : vars)
        if (v.is_wire()) out.push_back(n);
    return out;
}

int Program::next_process_id() const {
    int id = 0;
    for (const auto& p : processes) id = std::max(id, p.id + 1);
    return id;
}

Atom Atom::eq_lr(std::string x) {
    Atom a;
    a.kind = Kind::EqLR;
    a.x = std::move(x);
    return a;
}

Atom Atom::eq_const(Side side, std::string x, uint64_t value) {
    Atom a;
    a.kind = Kind::EqConst;
    a.side = side;
    a.x = std::move(x);
    a.value = value;
    return a;
}

Atom Atom::eq_vars(Side side, std::string x, std::string y) {
    Atom a;
    a.kind = Kind::EqVars;
    a.side = side;
    a.x = std::move(x);
    a.y = std::move(y);
    return a;
}

std::set<std::string> Formula::vars() const {
    std::set<std::string> out;
    for (const auto& a : atoms) {
        out.insert(a.x);
        if (a.kind == Atom::Kind::EqVars) out.insert(a.y);
    }
    return out;
}

bool AnnotationSet::empty() const {
    return sources.empty() && sinks.empty() && initial_eq.empty() && always_eq.empty();
}

// ---------------------------------------------------------------------------
// Traversals

static void collect_free_vars(const Expr& e, std::set<std::string>& out) {
    switch (e.kind()) {
        case Expr::Kind::Var: out.insert(e.name()); break;
        case Expr::Kind::Const: break;
        case Expr::Kind::App:
            for (const auto& a : e.args()) collect_free_vars(a, out);
            break;
    }
}

std::set<std::string> free_vars(const Expr& e) {
    std::set<std::string> out;
    collect_free_vars(e, out);
    return out;
}

static void collect_reads(const Stmt& s, std::set<std::string>& out) {
    switch (s.kind) {
        case Stmt::Kind::Skip: break;
        case Stmt::Kind::Assign: collect_free_vars(s.expr, out); break;
        case Stmt::Kind::If:
            collect_free_vars(s.expr, out);
            for (const auto& c : s.children) collect_reads(c, out);
            break;
        case Stmt::Kind::Seq:
            for (const auto& c : s.children) collect_reads(c, out);
            break;
    }
}

std::set<std::string> read_vars(const Stmt& s) {
    std::set<std::string> out;
    collect_reads(s, out);
    return out;
}

static void collect_assignments(const Stmt& s, std::vector<AssignSite>& out) {
    switch (s.kind) {
        case Stmt::Kind::Skip: break;
        case Stmt::Kind::Assign: out.push_back({&s, s.assign_kind, s.lhs}); break;
        case Stmt::Kind::If:
        case Stmt::Kind::Seq:
            for (const auto& c : s.children) collect_assignments(c, out);
            break;
    }
}

std::vector<AssignSite> assignments(const Stmt& s) {
    std::vector<AssignSite> out;
    collect_assignments(s, out);
    return out;
}

std::vector<const Stmt*> continuous_units(const Process& p) {
    std::vector<const Stmt*> out;
    for (const auto& site : assignments(p.body))
        if (site.kind == AssignKind::Continuous) out.push_back(site.stmt);
    return out;
}

static std::map<std::string, std::set<std::string>> wire_deps(const Program& program) {
    std::map<std::string, std::set<std::string>> deps;
    for (const auto& w : program.wires()) deps[w];
    for (const auto& p : program.processes)
        for (const auto& site : assignments(p.body)) {
            if (site.kind != AssignKind::Continuous) continue;
            for (const auto& v : free_vars(site.stmt->expr)) {
                auto it = program.vars.find(v);
                if (it != program.vars.end() && it->second.is_wire()) deps[site.lhs].insert(v);
            }
        }
    return deps;
}

// Depth-first search; on a back edge the stack from the revisited wire
// onwards is the cycle.
static std::vector<std::string> wire_order(const Program& program, std::vector<std::string>* cycle) {
    auto deps = wire_deps(program);
    std::map<std::string, int> state;
    std::vector<std::string> order, stack;
    std::function<bool(const std::string&)> visit = [&](const std::string& w) {
        state[w] = 1;
        stack.push_back(w);
        for (const auto& d : deps[w]) {
            if (state[d] == 1) {
                auto it = std::find(stack.begin(), stack.end(), d);
                cycle->assign(it, stack.end());
                return false;
            }
            if (state[d] == 0 && !visit(d)) return false;
        }
        stack.pop_back();
        state[w] = 2;
        order.push_back(w);
        return true;
    };
    for (const auto& [w, _] : deps)
        if (state[w] == 0 && !visit(w)) return {};
    return order;
}

std::vector<std::string> find_wire_cycle(const Program& program) {
    std::vector<std::string> cycle;
    wire_order(program, &cycle);
    return cycle;
}

std::vector<std::string> wire_topological_order(const Program& program) {
    std::vector<std::string> cycle;
    auto order = wire_order(program, &cycle);
    if (!cycle.empty()) {
        std::string names;
        for (const auto& w : cycle) names += (names.empty() ? "" : ", ") + w;
        throw CombinationalLoop("combinational loop through wires {" + names + "}");
    }
    return order;
}

static std::string renamed(const std::string& n, const std::map<std::string, std::string>& names) {
    auto it = names.find(n);
    return it == names.end() ? n : it->second;
}

Expr rename(const Expr& e, const std::map<std::string, std::string>& names) {
    switch (e.kind()) {
        case Expr::Kind::Var: return Expr::var(renamed(e.name(), names));
        case Expr::Kind::Const: return e;
        case Expr::Kind::App: {
            std::vector<Expr> args;
            args.reserve(e.args().size());
            for (const auto& a : e.args()) args.push_back(rename(a, names));
            return Expr::app(e.name(), std::move(args));
        }
    }
    return e;
}

Stmt rename(const Stmt& s, const std::map<std::string, std::string>& names) {
    Stmt out = s;
    if (s.kind == Stmt::Kind::Assign) out.lhs = renamed(s.lhs, names);
    if (s.expr.valid()) out.expr = rename(s.expr, names);
    for (auto& c : out.children) c = rename(c, names);
    return out;
}

unsigned bit_length(uint64_t v) {
    unsigned n = 0;
    while (v) {
        ++n;
        v >>= 1;
    }
    return std::max(1u, n);
}

namespace {

const std::set<std::string>& comparison_symbols() {
    static const std::set<std::string> s{"==", "!=", "<", "<=", ">", ">=", "&&", "||", "!"};
    return s;
}

const std::set<std::string>& builtin_symbols() {
    static const std::set<std::string> s{"==", "!=", "<",  "<=", ">",  ">=", "+", "-",  "*",      "&",    "|",
                                         "^",  "~",  "&&", "||", "!",  "<<", ">>", "?:", "concat", "slice"};
    return s;
}

}  // namespace

bool is_builtin_symbol(const std::string& symbol) { return builtin_symbols().count(symbol) != 0; }

unsigned result_width(const std::string& symbol, const std::vector<unsigned>& w, uint64_t hi, uint64_t lo) {
    if (comparison_symbols().count(symbol)) return 1;
    if (symbol == "~" || symbol == "<<" || symbol == ">>") return w.empty() ? 1 : w[0];
    if (symbol == "?:") return w.size() < 3 ? 1 : std::max(w[1], w[2]);
    if (symbol == "concat") {
        unsigned sum = 0;
        for (auto x : w) sum += x;
        return std::max(1u, sum);
    }
    if (symbol == "slice") return hi >= lo ? static_cast<unsigned>(hi - lo + 1) : 1;
    unsigned m = 1;
    for (auto x : w) m = std::max(m, x);
    return m;
}

unsigned expr_width(const Expr& e, const Program& program) {
    switch (e.kind()) {
        case Expr::Kind::Var: {
            auto it = program.vars.find(e.name());
            return it == program.vars.end() ? 1 : it->second.width;
        }
        case Expr::Kind::Const: return e.const_width() ? e.const_width() : bit_length(e.value());
        case Expr::Kind::App: {
            std::vector<unsigned> ws;
            for (const auto& a : e.args()) ws.push_back(expr_width(a, program));
            if (e.name() == "slice" && e.args().size() == 3)
                return result_width("slice", ws, e.args()[1].value(), e.args()[2].value());
            return result_width(e.name(), ws);
        }
    }
    return 1;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Validator {
    const Program& program;
    std::vector<Diagnostic> diags;

    void report(std::string msg, std::string subject = {}, std::optional<int> pid = std::nullopt) {
        diags.push_back({std::move(msg), std::move(subject), pid});
    }

    void check_expr(const Expr& e, int pid) {
        if (!e.valid()) {
            report("missing expression", {}, pid);
            return;
        }
        switch (e.kind()) {
            case Expr::Kind::Var:
                if (!program.has_var(e.name())) report("undeclared variable '" + e.name() + "'", e.name(), pid);
                break;
            case Expr::Kind::Const:
                if (e.const_width() > 64) report("constant wider than 64 bits", {}, pid);
                break;
            case Expr::Kind::App:
                if (e.args().empty()) report("function application without arguments", e.name(), pid);
                for (const auto& a : e.args()) check_expr(a, pid);
                check_arity(e, pid);
                if (expr_width(e, program) > 64) report("expression wider than 64 bits", e.name(), pid);
                break;
        }
    }

    void check_arity(const Expr& e, int pid) {
        const auto& s = e.name();
        size_t n = e.args().size();
        if (s == "slice") {
            if (n != 3 || !e.args()[1].is_const() || !e.args()[2].is_const()) {
                report("slice bounds must be constants", s, pid);
            } else if (e.args()[1].value() < e.args()[2].value()) {
                report("slice upper bound below lower bound", s, pid);
            }
        } else if (s == "?:") {
            if (n != 3) report("conditional operator takes three arguments", s, pid);
        } else if (s == "~" || s == "!") {
            if (n != 1) report("operator '" + s + "' takes one argument", s, pid);
        } else if (is_builtin_symbol(s) && s != "concat") {
            if (n != 2) report("operator '" + s + "' takes two arguments", s, pid);
        }
    }

    void check_stmt(const Stmt& s, const Process& p, bool top) {
        switch (s.kind) {
            case Stmt::Kind::Skip: break;
            case Stmt::Kind::Assign: {
                check_expr(s.expr, p.id);
                auto it = program.vars.find(s.lhs);
                if (it == program.vars.end()) {
                    report("undeclared variable '" + s.lhs + "'", s.lhs, p.id);
                    break;
                }
                if (s.assign_kind == AssignKind::Continuous) {
                    if (!it->second.is_wire()) report("continuous assignment target must be a wire", s.lhs, p.id);
                    if (p.kind != ProcessKind::Continuous)
                        report("continuous assignment inside a sequential process", s.lhs, p.id);
                } else {
                    if (!it->second.is_register())
                        report("procedural assignment target must be a register", s.lhs, p.id);
                    if (p.kind == ProcessKind::Continuous)
                        report("continuous process must contain only continuous assignments", s.lhs, p.id);
                }
                break;
            }
            case Stmt::Kind::If:
                if (p.kind == ProcessKind::Continuous)
                    report("continuous process must contain only continuous assignments", {}, p.id);
                if (s.children.size() != 2) report("conditional needs two branches", {}, p.id);
                check_expr(s.expr, p.id);
                for (const auto& c : s.children) check_stmt(c, p, false);
                break;
            case Stmt::Kind::Seq:
                for (const auto& c : s.children) {
                    if (c.kind == Stmt::Kind::Seq) report("nested sequence", {}, p.id);
                    check_stmt(c, p, false);
                }
                break;
        }
        (void)top;
    }

    void check_formula(const Formula& f) {
        for (const auto& v : f.vars()) {
            auto it = program.vars.find(v);
            if (it == program.vars.end())
                report("undeclared variable '" + v + "' in assumption", v);
            else if (!it->second.is_register())
                report("assumption may only refer to registers", v);
        }
    }
};

}  // namespace

std::vector<Diagnostic> validate_program(const Program& program, const AnnotationSet& annots) {
    Validator v{program, {}};
    for (const auto& [name, info] : program.vars) {
        if (info.width < 1 || info.width > 64) v.report("width must be between 1 and 64", name);
        if (info.name != name) v.report("variable table entry name mismatch", name);
    }
    std::set<int> ids;
    for (const auto& p : program.processes) {
        if (p.id < 0) v.report("process id must be non-negative", {}, p.id);
        if (!ids.insert(p.id).second) v.report("duplicate process id " + std::to_string(p.id), {}, p.id);
        if (p.kind == ProcessKind::Continuous && continuous_units(p).empty())
            v.report("continuous process without a continuous assignment", {}, p.id);
        v.check_stmt(p.body, p, true);
    }
    for (const auto& s : annots.sources) {
        auto it = program.vars.find(s);
        if (it == program.vars.end())
            v.report("undeclared variable '" + s + "' in source annotation", s);
        else if (!it->second.is_register())
            v.report("source must be a register", s);
    }
    for (const auto& s : annots.sinks) {
        auto it = program.vars.find(s);
        if (it == program.vars.end())
            v.report("undeclared variable '" + s + "' in sink annotation", s);
        else if (!it->second.is_register())
            v.report("sink must be a register", s);
    }
    for (const auto& f : annots.initial_eq) v.check_formula(f);
    for (const auto& f : annots.always_eq) v.check_formula(f);
    return std::move(v.diags);
}

}  // namespace ctlive
