#include "ctlive/ir_text.hpp"

#include <cctype>
#include <sstream>
#include <vector>

#include "ctlive/error.hpp"

namespace ctlive {

// ---------------------------------------------------------------------------
// Printing

std::string print_expr(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Var: return e.name();
        case Expr::Kind::Const:
            if (e.const_width() == 0) return std::to_string(e.value());
            return std::to_string(e.const_width()) + "'d" + std::to_string(e.value());
        case Expr::Kind::App: {
            std::string s = e.name() + "(";
            for (size_t i = 0; i < e.args().size(); ++i) {
                if (i) s += ", ";
                s += print_expr(e.args()[i]);
            }
            return s + ")";
        }
    }
    return {};
}

static std::string side_ref(const std::string& x, Side side) {
    switch (side) {
        case Side::L: return x + ".L";
        case Side::R: return x + ".R";
        case Side::Both: return x;
    }
    return x;
}

std::string print_formula(const Formula& f) {
    std::string s;
    for (size_t i = 0; i < f.atoms.size(); ++i) {
        if (i) s += " && ";
        const auto& a = f.atoms[i];
        switch (a.kind) {
            case Atom::Kind::EqLR: s += a.x + ".L == " + a.x + ".R"; break;
            case Atom::Kind::EqConst: s += side_ref(a.x, a.side) + " == " + std::to_string(a.value); break;
            case Atom::Kind::EqVars: s += side_ref(a.x, a.side) + " == " + side_ref(a.y, a.side); break;
        }
    }
    return s;
}

static void print_stmt_into(const Stmt& s, int indent, std::ostringstream& os) {
    std::string pad(static_cast<size_t>(indent), ' ');
    switch (s.kind) {
        case Stmt::Kind::Skip: break;
        case Stmt::Kind::Assign:
            switch (s.assign_kind) {
                case AssignKind::Blocking: os << pad << s.lhs << " = " << print_expr(s.expr) << ";\n"; break;
                case AssignKind::NonBlocking: os << pad << s.lhs << " <= " << print_expr(s.expr) << ";\n"; break;
                case AssignKind::Continuous:
                    os << pad << "assign " << s.lhs << " := " << print_expr(s.expr) << ";\n";
                    break;
            }
            break;
        case Stmt::Kind::If:
            os << pad << "if (" << print_expr(s.expr) << ") {\n";
            print_stmt_into(s.then_branch(), indent + 2, os);
            os << pad << "} else {\n";
            print_stmt_into(s.else_branch(), indent + 2, os);
            os << pad << "}\n";
            break;
        case Stmt::Kind::Seq:
            for (const auto& c : s.children) print_stmt_into(c, indent, os);
            break;
    }
}

std::string print_stmt(const Stmt& s, int indent) {
    std::ostringstream os;
    print_stmt_into(s, indent, os);
    return os.str();
}

std::string print_program(const Program& program, const AnnotationSet& annots) {
    std::ostringstream os;
    for (const auto& [name, v] : program.vars)
        os << (v.is_register() ? "reg " : "wire ") << name << " : " << v.width << ";\n";
    for (const auto& s : annots.sources) os << "source " << s << ";\n";
    for (const auto& s : annots.sinks) os << "sink " << s << ";\n";
    for (const auto& f : annots.initial_eq) os << "init_eq " << print_formula(f) << ";\n";
    for (const auto& f : annots.always_eq) os << "always_eq " << print_formula(f) << ";\n";
    for (const auto& p : program.processes) {
        os << "process " << p.id << " {\n";
        print_stmt_into(p.body, 2, os);
        os << "}\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
    enum class Kind { Ident, Number, Sized, Punct, End };
    Kind kind;
    std::string text;
    uint64_t value = 0;
    unsigned width = 0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    Lexer(const std::string& src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                t.kind = Token::Kind::End;
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Token::Kind::Ident;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                              src_[pos_] == '_' || src_[pos_] == '$'))
                    t.text += advance();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.kind = Token::Kind::Number;
                t.value = read_decimal();
                if (pos_ + 1 < src_.size() && src_[pos_] == '\'' && src_[pos_ + 1] == 'd') {
                    advance();
                    advance();
                    t.kind = Token::Kind::Sized;
                    t.width = static_cast<unsigned>(t.value);
                    if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        throw SyntaxError("malformed sized constant", span(t));
                    t.value = read_decimal();
                }
            } else {
                t.kind = Token::Kind::Punct;
                static const char* two[] = {"&&", "||", "==", "!=", "<=", ">=", "<<", ">>", "?:", ":="};
                bool matched = false;
                for (const char* op : two) {
                    if (src_.compare(pos_, 2, op) == 0) {
                        t.text = op;
                        advance();
                        advance();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    static const std::string singles = "<>+-*&|^~!(){};,:.=";
                    if (singles.find(c) == std::string::npos)
                        throw SyntaxError(std::string("unexpected character '") + c + "'", span(t));
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(t);
        }
    }

    SourceSpan span(const Token& t) const { return SourceSpan{file_, t.line, t.col, t.col + 1}; }

private:
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    uint64_t read_decimal() {
        uint64_t v = 0;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            v = v * 10 + static_cast<uint64_t>(advance() - '0');
        return v;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    const std::string& src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(const std::string& text, const std::string& file) : lexer_(text, file), toks_(lexer_.run()) {}

    std::pair<Program, AnnotationSet> program() {
        Program prog;
        AnnotationSet annots;
        while (!at_end()) {
            const Token& t = peek();
            if (t.kind != Token::Kind::Ident) fail("expected declaration, annotation or process");
            if (t.text == "reg" || t.text == "wire") {
                bool reg = next().text == "reg";
                std::string name = ident();
                expect(":");
                unsigned w = static_cast<unsigned>(number());
                expect(";");
                if (prog.has_var(name)) fail("duplicate declaration of '" + name + "'");
                prog.declare(name, reg ? StorageClass::Register : StorageClass::Wire, w);
            } else if (t.text == "source") {
                next();
                annots.sources.insert(ident());
                expect(";");
            } else if (t.text == "sink") {
                next();
                annots.sinks.insert(ident());
                expect(";");
            } else if (t.text == "init_eq") {
                next();
                annots.initial_eq.push_back(formula());
                expect(";");
            } else if (t.text == "always_eq") {
                next();
                annots.always_eq.push_back(formula());
                expect(";");
            } else if (t.text == "process") {
                next();
                Process p;
                p.id = static_cast<int>(number());
                expect("{");
                p.body = block_body();
                p.kind = is_continuous_body(p.body) ? ProcessKind::Continuous : ProcessKind::Sequential;
                prog.processes.push_back(std::move(p));
            } else {
                fail("unexpected '" + t.text + "'");
            }
        }
        return {std::move(prog), std::move(annots)};
    }

    Expr expr_only() {
        Expr e = expr();
        if (!at_end()) fail("trailing input after expression");
        return e;
    }

    Formula formula_only() {
        Formula f = formula();
        if (!at_end()) fail("trailing input after formula");
        return f;
    }

private:
    static bool is_continuous_body(const Stmt& s) {
        if (s.kind == Stmt::Kind::Assign) return s.assign_kind == AssignKind::Continuous;
        if (s.kind == Stmt::Kind::Seq) {
            for (const auto& c : s.children)
                if (!(c.kind == Stmt::Kind::Assign && c.assign_kind == AssignKind::Continuous)) return false;
            return true;
        }
        return false;
    }

    // Parses statements up to and including the closing brace.
    Stmt block_body() {
        std::vector<Stmt> stmts;
        while (!is_punct("}")) {
            if (at_end()) fail("unterminated block");
            stmts.push_back(statement());
        }
        next();
        return Stmt::seq(std::move(stmts));
    }

    Stmt statement() {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident) fail("expected statement");
        if (t.text == "skip") {
            next();
            expect(";");
            return Stmt::skip();
        }
        if (t.text == "if") {
            next();
            expect("(");
            Expr c = expr();
            expect(")");
            expect("{");
            Stmt th = block_body();
            Stmt el = Stmt::skip();
            if (peek().kind == Token::Kind::Ident && peek().text == "else") {
                next();
                expect("{");
                el = block_body();
            }
            return Stmt::ite(std::move(c), std::move(th), std::move(el));
        }
        if (t.text == "assign") {
            next();
            std::string lhs = ident();
            expect(":=");
            Expr rhs = expr();
            expect(";");
            return Stmt::continuous(std::move(lhs), std::move(rhs));
        }
        std::string lhs = ident();
        if (is_punct("<=")) {
            next();
            Expr rhs = expr();
            expect(";");
            return Stmt::nonblocking(std::move(lhs), std::move(rhs));
        }
        expect("=");
        Expr rhs = expr();
        expect(";");
        return Stmt::blocking(std::move(lhs), std::move(rhs));
    }

    Expr expr() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Number) {
            next();
            return Expr::constant(t.value);
        }
        if (t.kind == Token::Kind::Sized) {
            next();
            return Expr::constant(t.value, t.width);
        }
        std::string sym;
        if (t.kind == Token::Kind::Ident) {
            sym = next().text;
            if (!is_punct("(")) return Expr::var(std::move(sym));
        } else if (t.kind == Token::Kind::Punct && pos_ + 1 < toks_.size() &&
                   toks_[pos_ + 1].kind == Token::Kind::Punct && toks_[pos_ + 1].text == "(" && t.text != "(") {
            sym = next().text;
        } else {
            fail("expected expression");
        }
        expect("(");
        std::vector<Expr> args;
        if (!is_punct(")")) {
            args.push_back(expr());
            while (is_punct(",")) {
                next();
                args.push_back(expr());
            }
        }
        expect(")");
        if (args.empty()) fail("function application without arguments");
        return Expr::app(std::move(sym), std::move(args));
    }

    struct Ref {
        std::string name;
        Side side;
    };

    Ref ref() {
        Ref r{ident(), Side::Both};
        if (is_punct(".")) {
            next();
            std::string s = ident();
            if (s == "L")
                r.side = Side::L;
            else if (s == "R")
                r.side = Side::R;
            else
                fail("expected L or R after '.'");
        }
        return r;
    }

    Formula formula() {
        Formula f;
        f.atoms.push_back(atom());
        while (is_punct("&&")) {
            next();
            f.atoms.push_back(atom());
        }
        return f;
    }

    Atom atom() {
        Ref a = ref();
        expect("==");
        if (peek().kind == Token::Kind::Number) return Atom::eq_const(a.side, a.name, next().value);
        Ref b = ref();
        if (a.name == b.name && a.side != b.side && a.side != Side::Both && b.side != Side::Both)
            return Atom::eq_lr(a.name);
        if (a.side != b.side) fail("relational atom must compare one variable across copies");
        return Atom::eq_vars(a.side, a.name, b.name);
    }

    std::string ident() {
        if (peek().kind != Token::Kind::Ident) fail("expected identifier");
        return next().text;
    }

    uint64_t number() {
        if (peek().kind != Token::Kind::Number) fail("expected number");
        return next().value;
    }

    bool is_punct(const char* p) const { return peek().kind == Token::Kind::Punct && peek().text == p; }

    void expect(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'");
        next();
    }

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, lexer_.span(peek())); }

    Lexer lexer_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text) { return Parser(text, "<expr>").expr_only(); }

Formula parse_formula(const std::string& text) { return Parser(text, "<formula>").formula_only(); }

std::pair<Program, AnnotationSet> parse_program(const std::string& text, const std::string& filename) {
    return Parser(text, filename).program();
}

}  // namespace ctlive
