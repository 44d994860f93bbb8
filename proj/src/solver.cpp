#include "ctlive/solver.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ctlive/bitblast.hpp"
#include "ctlive/error.hpp"
#include "ctlive/sat.hpp"

namespace ctlive::smt {

std::string answer_name(Answer a) {
    switch (a) {
        case Answer::Sat: return "sat";
        case Answer::Unsat: return "unsat";
        case Answer::Unknown: return "unknown";
    }
    return "";
}

Answer BuiltinBackend::check(TermManager& tm, const std::vector<Term>& assertions, Model* model) {
    sat::Solver solver;
    BitBlaster bb(tm, solver);
    for (Term a : assertions)
        if (!solver.add_clause({bb.lit(a)})) return Answer::Unsat;
    if (solver.solve() == sat::Result::Unsat) return Answer::Unsat;
    if (model) {
        model->values.clear();
        for (Term v : tm.vars_of(assertions)) model->values[tm.symbol_name(tm.node(v).symbol)] = bb.model_value(v);
    }
    return Answer::Sat;
}

// ---------------------------------------------------------------------------
// SMT-LIB text

std::string smt_sort(unsigned width) {
    return width == 0 ? "Bool" : "(_ BitVec " + std::to_string(width) + ")";
}

std::string smt_symbol(const std::string& name) {
    std::string out = "|";
    for (char c : name) out += (c == '|' || c == '\\') ? '_' : c;
    return out + "|";
}

static std::string fn_symbol(const TermManager& tm, uint32_t sym) {
    return smt_symbol("f!" + tm.symbol_name(sym).substr(1));
}

static const char* op_name(Kind k) {
    switch (k) {
        case Kind::Not: return "not";
        case Kind::And: return "and";
        case Kind::Or: return "or";
        case Kind::Ite: return "ite";
        case Kind::Eq: return "=";
        case Kind::BvNot: return "bvnot";
        case Kind::BvAnd: return "bvand";
        case Kind::BvOr: return "bvor";
        case Kind::BvXor: return "bvxor";
        case Kind::BvAdd: return "bvadd";
        case Kind::BvSub: return "bvsub";
        case Kind::BvMul: return "bvmul";
        case Kind::BvShl: return "bvshl";
        case Kind::BvLshr: return "bvlshr";
        case Kind::BvUlt: return "bvult";
        case Kind::BvUle: return "bvule";
        case Kind::Concat: return "concat";
        default: return "";
    }
}

std::string smt_term(const TermManager& tm, Term root) {
    // Reference counts inside this term, then post-order let bindings.
    std::unordered_map<Term, int> refs;
    std::vector<Term> order;
    {
        std::vector<std::pair<Term, bool>> stack{{root, false}};
        std::unordered_map<Term, char> done;
        while (!stack.empty()) {
            auto [t, expanded] = stack.back();
            stack.pop_back();
            if (expanded) {
                order.push_back(t);
                continue;
            }
            if (done[t]++) continue;
            stack.push_back({t, true});
            const auto& args = tm.node(t).args;
            for (auto it = args.rbegin(); it != args.rend(); ++it) {
                ++refs[*it];
                stack.push_back({*it, false});
            }
        }
    }
    std::unordered_map<Term, std::string> text;
    std::string lets, closing;
    int next = 0;
    for (Term t : order) {
        const Node& n = tm.node(t);
        std::string s;
        switch (n.kind) {
            case Kind::Const:
                s = n.width == 0 ? (n.value ? "true" : "false")
                                 : "(_ bv" + std::to_string(n.value) + " " + std::to_string(n.width) + ")";
                break;
            case Kind::Var: s = smt_symbol(tm.symbol_name(n.symbol)); break;
            case Kind::Extract:
                s = "((_ extract " + std::to_string(n.value + n.width - 1) + " " + std::to_string(n.value) + ") " +
                    text.at(n.args[0]) + ")";
                break;
            case Kind::ZeroExt:
                s = "((_ zero_extend " + std::to_string(n.width - tm.width(n.args[0])) + ") " + text.at(n.args[0]) +
                    ")";
                break;
            default: {
                s = "(" + (n.kind == Kind::Apply ? fn_symbol(tm, n.symbol) : std::string(op_name(n.kind)));
                for (Term a : n.args) s += " " + text.at(a);
                s += ")";
            }
        }
        bool leaf = n.kind == Kind::Const || n.kind == Kind::Var;
        if (!leaf && refs[t] > 1 && t != root) {
            std::string name = "?a" + std::to_string(next++);
            lets += "(let ((" + name + " " + s + ")) ";
            closing += ")";
            s = name;
        }
        text[t] = s;
    }
    return lets + text.at(root) + closing;
}

std::string smt_function_declarations(const TermManager& tm, const std::vector<Term>& terms) {
    std::ostringstream os;
    // Function symbols with their signatures, in first-use order by term id.
    std::set<Term> seen;
    std::vector<Term> stack(terms.begin(), terms.end());
    std::map<Term, std::string> decls;
    std::set<std::string> declared;
    while (!stack.empty()) {
        Term t = stack.back();
        stack.pop_back();
        if (!seen.insert(t).second) continue;
        const Node& n = tm.node(t);
        if (n.kind == Kind::Apply) {
            std::string sig = "(declare-fun " + fn_symbol(tm, n.symbol) + " (";
            for (size_t i = 0; i < n.args.size(); ++i) sig += (i ? " " : "") + smt_sort(tm.width(n.args[i]));
            sig += ") " + smt_sort(n.width) + ")\n";
            decls[t] = sig;
        }
        for (Term a : n.args) stack.push_back(a);
    }
    for (const auto& [t, sig] : decls)
        if (declared.insert(fn_symbol(tm, tm.node(t).symbol)).second) os << sig;
    return os.str();
}

std::string smt_declarations(const TermManager& tm, const std::vector<Term>& terms) {
    std::ostringstream os;
    for (Term v : tm.vars_of(terms))
        os << "(declare-fun " << smt_symbol(tm.symbol_name(tm.node(v).symbol)) << " () " << smt_sort(tm.width(v))
           << ")\n";
    return os.str() + smt_function_declarations(tm, terms);
}

std::string smt_query(const TermManager& tm, const std::vector<Term>& assertions) {
    std::ostringstream os;
    os << "(set-logic QF_UFBV)\n" << smt_declarations(tm, assertions);
    for (Term a : assertions) os << "(assert " << smt_term(tm, a) << ")\n";
    os << "(check-sat)\n(exit)\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// External process

namespace {

struct TempFile {
    std::string path;
    TempFile() {
        const char* dir = std::getenv("TMPDIR");
        std::string tmpl = std::string(dir && *dir ? dir : "/tmp") + "/ctlive-XXXXXX";
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        int fd = mkstemp(buf.data());
        if (fd < 0) throw Error("cannot create a temporary file for the external solver");
        close(fd);
        path = buf.data();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

// Runs `command < input`, returning the exit status and standard output.
std::pair<int, std::string> run_command(const std::string& command, const std::string& input) {
    TempFile tmp;
    {
        std::ofstream out(tmp.path);
        out << input;
    }
    std::string full = command + " < '" + tmp.path + "' 2>/dev/null";
    FILE* pipe = popen(full.c_str(), "r");
    if (!pipe) throw SolverUnavailable("cannot start external solver '" + command + "'");
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, output};
}

}  // namespace

Answer ExternalBackend::check(TermManager& tm, const std::vector<Term>& assertions, Model*) {
    auto [code, output] = run_command(command_, smt_query(tm, assertions));
    if (code == 127 || code == 126) throw SolverUnavailable("external solver '" + command_ + "' could not be run");
    std::istringstream is(output);
    std::string tok;
    while (is >> tok) {
        if (tok == "sat") return Answer::Sat;
        if (tok == "unsat") return Answer::Unsat;
    }
    return Answer::Unknown;
}

std::unique_ptr<Backend> make_backend(const std::string& spec) {
    if (spec.empty() || spec == "builtin") return std::make_unique<BuiltinBackend>();
    const std::string prefix = "external:";
    if (spec.rfind(prefix, 0) != 0) throw Error("unknown solver '" + spec + "' (expected builtin or external:<command>)");
    std::string cmd = spec.substr(prefix.size());
    if (cmd.empty()) {
        const char* env = std::getenv(kSolverEnv);
        if (!env || !*env)
            throw SolverUnavailable(std::string("no external solver command given and ") + kSolverEnv + " is not set");
        cmd = env;
    }
    // Probe once with a trivial script so a missing binary fails early.
    auto [code, output] = run_command(cmd, "(check-sat)\n(exit)\n");
    if (code == 127 || code == 126 || output.find("sat") == std::string::npos)
        throw SolverUnavailable("external solver '" + cmd + "' could not be run");
    return std::make_unique<ExternalBackend>(cmd);
}

ImplicationResult check_implication(TermManager& tm, Term antecedent, Term consequent, Backend& backend) {
    ImplicationResult r;
    Answer a = backend.check(tm, {antecedent, tm.mk_not(consequent)}, &r.model);
    r.validity = a == Answer::Unsat ? Validity::Valid : a == Answer::Sat ? Validity::CounterModel : Validity::Unknown;
    if (r.validity != Validity::CounterModel) r.model.values.clear();
    return r;
}

}  // namespace ctlive::smt
