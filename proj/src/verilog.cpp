#include "ctlive/verilog.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <regex>
#include <set>

namespace ctlive::verilog {

const Decl* Module::find(const std::string& name) const {
    for (const auto& d : decls)
        if (d.name == name) return &d;
    return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

struct Tok {
    enum class Kind { Ident, Number, Op, End };
    Kind kind = Kind::End;
    std::string text;
    uint64_t value = 0;
    unsigned width = 0;  // 0 = unsized
    int line = 1;
    int col = 1;
};

struct Comment {
    std::string text;
    int line;
    int col;
    size_t token_index;
};

uint64_t parse_based_digits(const std::string& digits, int base, const std::function<void(const std::string&)>& fail) {
    uint64_t v = 0;
    for (char c : digits) {
        if (c == '_') continue;
        int d;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'f')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            d = c - 'A' + 10;
        else if (c == 'x' || c == 'X' || c == 'z' || c == 'Z' || c == '?') {
            fail("x/z values are not supported");
            return 0;
        } else {
            fail(std::string("invalid digit '") + c + "' in number");
            return 0;
        }
        if (d >= base) fail(std::string("invalid digit '") + c + "' for base");
        unsigned __int128 next = static_cast<unsigned __int128>(v) * static_cast<unsigned>(base) + static_cast<unsigned>(d);
        if (next > ~uint64_t{0}) fail("constant wider than 64 bits");
        v = static_cast<uint64_t>(next);
    }
    return v;
}

class Lexer {
public:
    Lexer(const std::string& src, std::string file) : src_(src), file_(std::move(file)) {}

    std::vector<Tok> toks;
    std::vector<Comment> comments;

    void run() {
        for (;;) {
            skip();
            Tok t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                toks.push_back(t);
                return;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
                t.kind = Tok::Kind::Ident;
                while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                              src_[pos_] == '_' || src_[pos_] == '$'))
                    t.text += get();
            } else if (c == '\\') {
                fail_at(t, "escaped identifiers are not supported");
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
                number(t);
            } else if (c == '`') {
                std::string d;
                get();
                while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) d += get();
                if (d == "timescale" || d == "default_nettype") {
                    while (pos_ < src_.size() && src_[pos_] != '\n') get();
                    continue;
                }
                throw UnsupportedConstruct("compiler directive `" + d + " is not supported", span(t));
            } else if (c == '"') {
                fail_at(t, "string literals are not supported");
            } else {
                t.kind = Tok::Kind::Op;
                static const char* ops[] = {"===", "!==", "<<<", ">>>", "==", "!=", "<=", ">=", "&&", "||", "<<",
                                            ">>",  "~&",  "~|",  "~^",  "^~", "->", "+:", "-:"};
                for (const char* op : ops) {
                    size_t n = std::char_traits<char>::length(op);
                    if (src_.compare(pos_, n, op) == 0) {
                        t.text = op;
                        for (size_t i = 0; i < n; ++i) get();
                        break;
                    }
                }
                if (t.text.empty()) {
                    static const std::string singles = "+-*/%<>=!~&|^?:;,.()[]{}@#";
                    if (singles.find(c) == std::string::npos)
                        fail_at(t, std::string("unexpected character '") + c + "'");
                    t.text = std::string(1, get());
                }
            }
            toks.push_back(t);
        }
    }

    SourceSpan span(const Tok& t) const {
        return SourceSpan{file_, t.line, t.col, t.col + std::max<int>(1, static_cast<int>(t.text.size()))};
    }
    const std::string& file() const { return file_; }

private:
    [[noreturn]] void fail_at(const Tok& t, const std::string& msg) { throw SyntaxError(msg, span(t)); }

    char get() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else if (src_.compare(pos_, 2, "//") == 0) {
                Comment cm{{}, line_, col_, toks.size()};
                while (pos_ < src_.size() && src_[pos_] != '\n') cm.text += get();
                comments.push_back(std::move(cm));
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                Tok t;
                t.line = line_;
                t.col = col_;
                get();
                get();
                while (pos_ < src_.size() && src_.compare(pos_, 2, "*/") != 0) get();
                if (pos_ >= src_.size()) fail_at(t, "unterminated block comment");
                get();
                get();
            } else {
                break;
            }
        }
    }

    void number(Tok& t) {
        t.kind = Tok::Kind::Number;
        std::string size;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            size += get();
        auto fail = [&](const std::string& m) { fail_at(t, m); };
        if (pos_ < src_.size() && src_[pos_] == '\'') {
            get();
            if (pos_ < src_.size() && (src_[pos_] == 's' || src_[pos_] == 'S'))
                fail_at(t, "signed constants are not supported");
            if (pos_ >= src_.size()) fail_at(t, "malformed number");
            char b = static_cast<char>(std::tolower(static_cast<unsigned char>(get())));
            int base = b == 'b' ? 2 : b == 'o' ? 8 : b == 'd' ? 10 : b == 'h' ? 16 : 0;
            if (!base) fail_at(t, "malformed number base");
            std::string digits;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                                          src_[pos_] == '?'))
                digits += get();
            if (digits.empty()) fail_at(t, "missing digits in number");
            t.value = parse_based_digits(digits, base, fail);
            if (!size.empty()) {
                uint64_t w = parse_based_digits(size, 10, fail);
                if (w == 0 || w > 64) fail_at(t, "constant width must be between 1 and 64");
                t.width = static_cast<unsigned>(w);
                if (t.width < 64 && (t.value >> t.width) != 0) fail_at(t, "constant does not fit its width");
            }
            t.text = size + "'" + b + digits;
        } else {
            t.value = parse_based_digits(size, 10, fail);
            t.text = size;
        }
    }

    const std::string& src_;
    std::string file_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(const std::string& text, const std::string& file) : lex_(text, file) { lex_.run(); }

    std::vector<Module> file() {
        std::vector<Module> mods;
        std::vector<size_t> ends;
        while (!at_end()) {
            if (!is_kw("module")) fail("expected 'module'");
            mods.push_back(module());
            ends.push_back(pos_);
        }
        // Comments belong to the module whose endmodule follows them; trailing
        // comments belong to the last module.
        for (const auto& c : lex_.comments) {
            if (mods.empty()) break;
            size_t m = 0;
            while (m + 1 < mods.size() && c.token_index >= ends[m]) ++m;
            auto anns = parse_annotations(c.text, lex_.file());
            for (auto& a : anns) {
                a.span.line = c.line;
                a.span.col_begin += c.col - 1;
                a.span.col_end += c.col - 1;
                mods[m].annotations.push_back(a);
            }
        }
        return mods;
    }

private:
    // -- module structure --------------------------------------------------

    Module module() {
        Module m;
        m.span = span();
        next();  // module
        m.name = ident("module name");
        if (is_op("#")) unsupported("parameterized modules are not supported");
        if (is_op("(")) {
            next();
            if (!is_op(")")) {
                if (is_direction()) {
                    ansi_ports(m);
                } else {
                    for (;;) {
                        std::string p = ident("port name");
                        m.ports.push_back(p);
                        if (!is_op(",")) break;
                        next();
                    }
                }
            }
            expect(")");
        }
        expect(";");
        while (!is_kw("endmodule")) {
            if (at_end()) fail("missing 'endmodule'");
            module_item(m);
        }
        next();
        for (const auto& p : m.ports) {
            const Decl* d = m.find(p);
            if (!d || d->direction == Direction::None)
                throw SyntaxError("port '" + p + "' has no direction declaration", m.span);
        }
        adjust_selects(m);
        return m;
    }

    bool is_direction() const { return is_kw("input") || is_kw("output") || is_kw("inout"); }

    Direction direction() {
        std::string d = next().text;
        if (d == "input") return Direction::Input;
        if (d == "output") return Direction::Output;
        return Direction::Inout;
    }

    void ansi_ports(Module& m) {
        Direction dir = Direction::Input;
        StorageClass st = StorageClass::Wire;
        std::pair<unsigned, int64_t> range{1, 0};
        for (;;) {
            if (is_direction()) {
                dir = direction();
                st = StorageClass::Wire;
                if (is_kw("reg")) {
                    next();
                    st = StorageClass::Register;
                } else if (is_kw("wire")) {
                    next();
                }
                if (is_kw("signed")) unsupported("signed signals are not supported");
                range = is_op("[") ? parse_range() : std::pair<unsigned, int64_t>{1, 0};
            }
            SourceSpan sp = span();
            std::string name = ident("port name");
            m.ports.push_back(name);
            declare(m, name, dir, st, true, range, sp);
            if (!is_op(",")) break;
            next();
        }
    }

    std::pair<unsigned, int64_t> parse_range() {
        SourceSpan sp = span();
        expect("[");
        int64_t msb = const_int();
        expect(":");
        int64_t lsb = const_int();
        expect("]");
        if (msb < lsb) throw UnsupportedConstruct("ascending ranges are not supported", sp);
        int64_t w = msb - lsb + 1;
        if (w > 64) throw UnsupportedConstruct("signals wider than 64 bits are not supported", sp);
        return {static_cast<unsigned>(w), lsb};
    }

    int64_t const_int() {
        if (peek().kind != Tok::Kind::Number) unsupported("expected a constant number");
        return static_cast<int64_t>(next().value);
    }

    // Declarations may be split (non-ANSI port list plus `input` plus `reg`).
    void declare(Module& m, const std::string& name, Direction dir, StorageClass st, bool has_storage,
                 std::pair<unsigned, int64_t> range, const SourceSpan& sp) {
        for (auto& d : m.decls) {
            if (d.name != name) continue;
            bool dup_dir = dir != Direction::None && d.direction != Direction::None;
            bool dup_type = dir == Direction::None && d.direction == Direction::None;
            if (dup_dir || dup_type) throw SyntaxError("duplicate declaration of '" + name + "'", sp);
            if (dir != Direction::None) d.direction = dir;
            if (has_storage && st == StorageClass::Register) d.storage = StorageClass::Register;
            if (range.first != 1 || range.second != 0) {
                d.width = range.first;
                d.lsb = range.second;
            }
            return;
        }
        m.decls.push_back(Decl{name, dir, st, range.first, range.second, sp});
    }

    void module_item(Module& m) {
        const Tok& t = peek();
        if (t.kind != Tok::Kind::Ident) fail("expected a module item");
        const std::string& k = t.text;
        if (k == "input" || k == "output" || k == "inout") {
            Direction dir = direction();
            StorageClass st = StorageClass::Wire;
            bool has_storage = false;
            if (is_kw("reg")) {
                next();
                st = StorageClass::Register;
                has_storage = true;
            } else if (is_kw("wire")) {
                next();
                has_storage = true;
            }
            auto range = is_op("[") ? parse_range() : std::pair<unsigned, int64_t>{1, 0};
            for (;;) {
                SourceSpan sp = span();
                std::string name = ident("signal name");
                if (std::find(m.ports.begin(), m.ports.end(), name) == m.ports.end())
                    throw SyntaxError("'" + name + "' is not in the port list", sp);
                declare(m, name, dir, st, has_storage, range, sp);
                if (!is_op(",")) break;
                next();
            }
            expect(";");
        } else if (k == "reg" || k == "wire") {
            bool reg = next().text == "reg";
            if (is_kw("signed")) unsupported("signed signals are not supported");
            auto range = is_op("[") ? parse_range() : std::pair<unsigned, int64_t>{1, 0};
            for (;;) {
                SourceSpan sp = span();
                std::string name = ident("signal name");
                if (is_op("[")) unsupported("memories are not supported");
                declare(m, name, Direction::None, reg ? StorageClass::Register : StorageClass::Wire, true, range, sp);
                if (is_op("=")) {
                    if (reg) unsupported("register initializers are not supported");
                    next();
                    Item it;
                    it.kind = Item::Kind::Assign;
                    it.lhs = name;
                    it.rhs = expr();
                    it.span = sp;
                    m.items.push_back(std::move(it));
                }
                if (!is_op(",")) break;
                next();
            }
            expect(";");
        } else if (k == "assign") {
            next();
            for (;;) {
                Item it;
                it.kind = Item::Kind::Assign;
                it.span = span();
                it.lhs = lvalue();
                expect("=");
                if (is_op("#")) fail_syntax("delays are not supported");
                it.rhs = expr();
                m.items.push_back(std::move(it));
                if (!is_op(",")) break;
                next();
            }
            expect(";");
        } else if (k == "always" || k == "always_ff" || k == "always_comb") {
            Item it;
            it.kind = Item::Kind::Always;
            it.span = span();
            next();
            if (!is_op("@")) fail_syntax("always block without event control is not supported");
            next();
            it.sensitivity = sensitivity();
            it.body = statement();
            m.items.push_back(std::move(it));
        } else if (k == "initial" || k == "final") {
            fail_syntax("non-synthesizable construct");
        } else if (k == "generate" || k == "genvar" || k == "for") {
            fail_syntax("generate blocks are not supported");
        } else if (k == "parameter" || k == "localparam" || k == "defparam") {
            unsupported("parameters are not supported");
        } else if (k == "function" || k == "task") {
            unsupported("functions and tasks are not supported");
        } else if (k == "integer" || k == "real" || k == "time" || k == "event") {
            unsupported("'" + k + "' declarations are not supported");
        } else if (k == "module") {
            fail("nested module declaration");
        } else {
            instance(m);
        }
    }

    Sensitivity sensitivity() {
        if (is_op("*")) {
            next();
            return Sensitivity::Combinational;
        }
        expect("(");
        if (is_op("*")) {
            next();
            expect(")");
            return Sensitivity::Combinational;
        }
        bool edge = false;
        for (;;) {
            if (is_kw("posedge") || is_kw("negedge")) {
                next();
                edge = true;
            }
            ident("signal name");
            if (is_kw("or") || is_op(",")) {
                next();
                continue;
            }
            break;
        }
        expect(")");
        return edge ? Sensitivity::Clocked : Sensitivity::Combinational;
    }

    void instance(Module& m) {
        Item it;
        it.kind = Item::Kind::Instance;
        it.span = span();
        it.module = ident("module name");
        if (is_op("#")) unsupported("parameterized instances are not supported");
        it.instance = ident("instance name");
        expect("(");
        if (!is_op(")")) {
            for (;;) {
                Connection c;
                c.span = span();
                if (is_op(".")) {
                    next();
                    c.port = ident("port name");
                    expect("(");
                    if (is_op(")"))
                        c.connected = false;
                    else
                        c.expr = expr();
                    expect(")");
                } else {
                    c.expr = expr();
                }
                it.connections.push_back(std::move(c));
                if (!is_op(",")) break;
                next();
            }
        }
        expect(")");
        expect(";");
        m.items.push_back(std::move(it));
    }

    // -- statements --------------------------------------------------------

    std::string lvalue() {
        if (is_op("{")) fail_syntax("multi-variable assignment targets are not supported");
        std::string name = ident("assignment target");
        if (is_op("[")) unsupported("assignments to part of a signal are not supported");
        return name;
    }

    VStmt statement() {
        VStmt s;
        s.span = span();
        const Tok& t = peek();
        if (t.kind == Tok::Kind::Op) {
            if (t.text == ";") {
                next();
                return s;
            }
            if (t.text == "#") fail_syntax("delays are not supported");
            if (t.text == "@") fail_syntax("event controls inside statements are not supported");
            if (t.text == "->") fail_syntax("named events are not supported");
            if (t.text == "{") fail_syntax("multi-variable assignment targets are not supported");
            fail("expected a statement");
        }
        if (t.kind != Tok::Kind::Ident) fail("expected a statement");
        const std::string k = t.text;
        if (k == "begin") {
            next();
            if (is_op(":")) {
                next();
                ident("block label");
            }
            s.kind = VStmt::Kind::Block;
            while (!is_kw("end")) {
                if (at_end()) fail("missing 'end'");
                s.body.push_back(statement());
            }
            next();
            return s;
        }
        if (k == "if") {
            next();
            s.kind = VStmt::Kind::If;
            expect("(");
            s.expr = expr();
            expect(")");
            s.body.push_back(statement());
            if (is_kw("else")) {
                next();
                s.body.push_back(statement());
            }
            return s;
        }
        if (k == "case") {
            next();
            s.kind = VStmt::Kind::Case;
            expect("(");
            s.expr = expr();
            expect(")");
            while (!is_kw("endcase")) {
                if (at_end()) fail("missing 'endcase'");
                VStmt::CaseItem item;
                if (is_kw("default")) {
                    next();
                    if (is_op(":")) next();
                } else {
                    for (;;) {
                        item.labels.push_back(expr());
                        if (!is_op(",")) break;
                        next();
                    }
                    expect(":");
                }
                item.body.push_back(statement());
                s.items.push_back(std::move(item));
            }
            next();
            return s;
        }
        if (k == "casez" || k == "casex") unsupported("casez/casex are not supported");
        if (k == "for" || k == "while" || k == "repeat" || k == "forever") unsupported("loops are not supported");
        if (k == "wait" || k == "fork" || k == "disable") fail_syntax("non-synthesizable construct");
        if (!k.empty() && k[0] == '$') fail_syntax("system tasks are not supported");
        s.kind = VStmt::Kind::Assign;
        s.lhs = lvalue();
        if (is_op("=")) {
            s.blocking = true;
        } else if (is_op("<=")) {
            s.blocking = false;
        } else {
            fail("expected '=' or '<='");
        }
        next();
        if (is_op("#") || is_op("@")) fail_syntax("intra-assignment delays are not supported");
        s.expr = expr();
        expect(";");
        return s;
    }

    // -- expressions -------------------------------------------------------

    static int precedence(const std::string& op) {
        if (op == "||") return 1;
        if (op == "&&") return 2;
        if (op == "|") return 3;
        if (op == "^") return 4;
        if (op == "&") return 5;
        if (op == "==" || op == "!=") return 6;
        if (op == "<" || op == "<=" || op == ">" || op == ">=") return 7;
        if (op == "<<" || op == ">>") return 8;
        if (op == "+" || op == "-") return 9;
        if (op == "*") return 10;
        return 0;
    }

    Expr expr() {
        Expr c = binary(1);
        if (is_op("?")) {
            next();
            Expr a = expr();
            expect(":");
            Expr b = expr();
            return Expr::app("?:", {c, a, b});
        }
        return c;
    }

    Expr binary(int min_prec) {
        Expr lhs = unary();
        for (;;) {
            const Tok& t = peek();
            if (t.kind != Tok::Kind::Op) break;
            if (t.text == "/" || t.text == "%") unsupported("division and modulo are not supported");
            if (t.text == "===" || t.text == "!==") unsupported("case equality is not supported");
            if (t.text == "<<<" || t.text == ">>>") unsupported("arithmetic shifts are not supported");
            if (t.text == "~^" || t.text == "^~") unsupported("xnor is not supported");
            int p = precedence(t.text);
            if (p == 0 || p < min_prec) break;
            std::string op = next().text;
            Expr rhs = binary(p + 1);
            lhs = Expr::app(op, {lhs, rhs});
        }
        return lhs;
    }

    Expr unary() {
        const Tok& t = peek();
        if (t.kind == Tok::Kind::Op) {
            if (t.text == "!" || t.text == "~") {
                std::string op = next().text;
                if (op == "~" && (is_op("&") || is_op("|") || is_op("^")))
                    unsupported("reduction operators are not supported");
                return Expr::app(op, {unary()});
            }
            if (t.text == "-") {
                next();
                return Expr::app("-", {Expr::constant(0), unary()});
            }
            if (t.text == "+") {
                next();
                return unary();
            }
            if (t.text == "&" || t.text == "|" || t.text == "^" || t.text == "~&" || t.text == "~|")
                unsupported("reduction operators are not supported");
        }
        return primary();
    }

    Expr primary() {
        const Tok& t = peek();
        if (t.kind == Tok::Kind::Number) {
            next();
            return Expr::constant(t.value, t.width);
        }
        if (t.kind == Tok::Kind::Ident) {
            if (t.text[0] == '$') fail_syntax("system functions are not supported");
            std::string name = next().text;
            if (is_op("(")) unsupported("function calls are not supported");
            Expr v = Expr::var(name);
            if (is_op("[")) {
                next();
                if (peek().kind != Tok::Kind::Number) unsupported("bit-select with a non-constant index");
                uint64_t hi = next().value, lo = hi;
                if (is_op("+:") || is_op("-:")) unsupported("indexed part-selects are not supported");
                if (is_op(":")) {
                    next();
                    if (peek().kind != Tok::Kind::Number) unsupported("part-select with non-constant bounds");
                    lo = next().value;
                }
                expect("]");
                if (hi < lo) unsupported("ascending part-select");
                v = Expr::app("slice", {v, Expr::constant(hi), Expr::constant(lo)});
                if (is_op("[")) unsupported("nested selects are not supported");
            }
            return v;
        }
        if (is_op("(")) {
            next();
            Expr e = expr();
            expect(")");
            return e;
        }
        if (is_op("{")) {
            next();
            Expr first = expr();
            if (is_op("{")) {
                if (!first.is_const()) unsupported("replication count must be a constant");
                next();
                std::vector<Expr> parts;
                for (;;) {
                    parts.push_back(expr());
                    if (!is_op(",")) break;
                    next();
                }
                expect("}");
                expect("}");
                std::vector<Expr> all;
                for (uint64_t i = 0; i < first.value(); ++i) all.insert(all.end(), parts.begin(), parts.end());
                if (all.empty()) unsupported("zero replication");
                return all.size() == 1 ? all[0] : Expr::app("concat", all);
            }
            std::vector<Expr> parts{first};
            while (is_op(",")) {
                next();
                parts.push_back(expr());
            }
            expect("}");
            return parts.size() == 1 ? parts[0] : Expr::app("concat", parts);
        }
        fail("expected an expression");
    }

    // Shift select indices by the declared lsb of the selected signal.
    void adjust_selects(Module& m) {
        std::function<Expr(const Expr&)> fix = [&](const Expr& e) -> Expr {
            if (!e.is_app()) return e;
            std::vector<Expr> args;
            for (const auto& a : e.args()) args.push_back(fix(a));
            if (e.name() == "slice" && args.size() == 3 && args[0].is_var()) {
                const Decl* d = m.find(args[0].name());
                if (d) {
                    int64_t hi = static_cast<int64_t>(args[1].value()) - d->lsb;
                    int64_t lo = static_cast<int64_t>(args[2].value()) - d->lsb;
                    if (lo < 0 || hi >= static_cast<int64_t>(d->width))
                        throw UnsupportedConstruct("select out of range for '" + d->name + "'", d->span);
                    args[1] = Expr::constant(static_cast<uint64_t>(hi));
                    args[2] = Expr::constant(static_cast<uint64_t>(lo));
                }
            }
            return Expr::app(e.name(), args);
        };
        std::function<void(VStmt&)> fix_stmt = [&](VStmt& s) {
            if (s.expr.valid()) s.expr = fix(s.expr);
            for (auto& c : s.body) fix_stmt(c);
            for (auto& it : s.items) {
                for (auto& l : it.labels) l = fix(l);
                for (auto& c : it.body) fix_stmt(c);
            }
        };
        for (auto& it : m.items) {
            if (it.rhs.valid()) it.rhs = fix(it.rhs);
            fix_stmt(it.body);
            for (auto& c : it.connections)
                if (c.expr.valid()) c.expr = fix(c.expr);
        }
    }

    // -- token helpers -----------------------------------------------------

    const Tok& peek() const { return lex_.toks[pos_]; }
    const Tok& next() { return lex_.toks[pos_ < lex_.toks.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Tok::Kind::End; }
    bool is_op(const char* op) const { return peek().kind == Tok::Kind::Op && peek().text == op; }
    bool is_kw(const char* kw) const { return peek().kind == Tok::Kind::Ident && peek().text == kw; }
    SourceSpan span() const { return lex_.span(peek()); }

    std::string ident(const char* what) {
        if (peek().kind != Tok::Kind::Ident) fail(std::string("expected ") + what);
        return next().text;
    }

    void expect(const char* op) {
        if (!is_op(op)) fail(std::string("expected '") + op + "'");
        next();
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string found = at_end() ? "end of input" : "'" + peek().text + "'";
        throw SyntaxError(msg + ", found " + found, span());
    }
    [[noreturn]] void fail_syntax(const std::string& msg) const { throw SyntaxError(msg, span()); }
    [[noreturn]] void unsupported(const std::string& msg) const { throw UnsupportedConstruct(msg, span()); }

    Lexer lex_;
    size_t pos_ = 0;
};

uint64_t annotation_constant(const std::string& s, const SourceSpan& sp) {
    auto fail = [&](const std::string& m) { throw SyntaxError(m, sp); };
    auto q = s.find('\'');
    if (q == std::string::npos) return parse_based_digits(s, 10, fail);
    char b = static_cast<char>(std::tolower(static_cast<unsigned char>(s[q + 1])));
    int base = b == 'b' ? 2 : b == 'o' ? 8 : b == 'd' ? 10 : 16;
    return parse_based_digits(s.substr(q + 2), base, fail);
}

// ---------------------------------------------------------------------------
// Normalization helpers

Expr rename_expr(const Expr& e, const std::map<std::string, std::string>& names) { return rename(e, names); }

void rename_stmt(VStmt& s, const std::map<std::string, std::string>& names) {
    if (!s.lhs.empty()) {
        auto it = names.find(s.lhs);
        if (it != names.end()) s.lhs = it->second;
    }
    if (s.expr.valid()) s.expr = rename_expr(s.expr, names);
    for (auto& c : s.body) rename_stmt(c, names);
    for (auto& it : s.items) {
        for (auto& l : it.labels) l = rename_expr(l, names);
        for (auto& c : it.body) rename_stmt(c, names);
    }
}

VStmt desugar(const VStmt& s) {
    VStmt out = s;
    out.body.clear();
    out.items.clear();
    for (const auto& c : s.body) out.body.push_back(desugar(c));
    if (s.kind != VStmt::Kind::Case) return out;
    // case becomes an if/else chain; the default item, wherever written, comes last.
    const VStmt::CaseItem* def = nullptr;
    std::vector<const VStmt::CaseItem*> items;
    for (const auto& it : s.items) {
        if (it.labels.empty())
            def = &it;
        else
            items.push_back(&it);
    }
    VStmt chain;
    chain.span = s.span;
    if (def) chain = desugar(def->body.at(0));
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
        std::vector<Expr> tests;
        for (const auto& l : (*it)->labels) tests.push_back(Expr::app("==", {s.expr, l}));
        Expr cond = tests[0];
        for (size_t i = 1; i < tests.size(); ++i) cond = Expr::app("||", {cond, tests[i]});
        VStmt ifs;
        ifs.kind = VStmt::Kind::If;
        ifs.span = s.span;
        ifs.expr = cond;
        ifs.body.push_back(desugar((*it)->body.at(0)));
        if (chain.kind != VStmt::Kind::Null || def) ifs.body.push_back(chain);
        chain = std::move(ifs);
    }
    return chain;
}

struct Flattener {
    const std::map<std::string, const Module*>& mods;
    std::map<std::string, Module> done;

    const Module& flatten(const std::string& name) {
        auto it = done.find(name);
        if (it != done.end()) return it->second;
        const Module& m = *mods.at(name);
        Module out;
        out.name = m.name;
        out.ports = m.ports;
        out.decls = m.decls;
        out.annotations = m.annotations;
        out.span = m.span;
        for (const auto& item : m.items) {
            if (item.kind != Item::Kind::Instance) {
                Item copy = item;
                copy.body = desugar(item.body);
                out.items.push_back(std::move(copy));
                continue;
            }
            inline_instance(out, item, flatten(item.module));
        }
        return done.emplace(name, std::move(out)).first->second;
    }

    void inline_instance(Module& out, const Item& inst, const Module& child) {
        std::string prefix = inst.instance + "$";
        std::map<std::string, std::string> names;
        for (const auto& d : child.decls) names[d.name] = prefix + d.name;
        for (const auto& d : child.decls) {
            if (out.find(prefix + d.name))
                throw SyntaxError("name clash while inlining '" + inst.instance + "': " + prefix + d.name, inst.span);
            Decl nd = d;
            nd.name = prefix + d.name;
            nd.direction = Direction::None;
            if (d.direction == Direction::Input) nd.storage = StorageClass::Wire;
            if (d.direction == Direction::Inout)
                throw UnsupportedConstruct("inout ports are not supported", d.span);
            out.decls.push_back(nd);
        }
        std::map<std::string, const Connection*> conns;
        size_t positional = 0;
        for (const auto& c : inst.connections) {
            std::string port = c.port;
            if (port.empty()) {
                if (positional >= child.ports.size())
                    throw SyntaxError("too many connections for '" + child.name + "'", c.span);
                port = child.ports[positional++];
            }
            if (std::find(child.ports.begin(), child.ports.end(), port) == child.ports.end())
                throw SyntaxError("module '" + child.name + "' has no port '" + port + "'", c.span);
            if (conns.count(port)) throw SyntaxError("port '" + port + "' connected twice", c.span);
            conns[port] = &c;
        }
        for (const auto& p : child.ports) {
            auto it = conns.find(p);
            if (it == conns.end() || !it->second->connected) continue;
            const Decl* d = child.find(p);
            Item a;
            a.kind = Item::Kind::Assign;
            a.span = it->second->span;
            if (d->direction == Direction::Input) {
                a.lhs = prefix + p;
                a.rhs = it->second->expr;
            } else {
                if (!it->second->expr.is_var())
                    throw UnsupportedConstruct("output port '" + p + "' must connect to a signal", a.span);
                a.lhs = it->second->expr.name();
                a.rhs = Expr::var(prefix + p);
            }
            out.items.push_back(std::move(a));
        }
        for (const auto& item : child.items) {
            Item copy = item;
            auto lit = names.find(copy.lhs);
            if (lit != names.end()) copy.lhs = lit->second;
            if (copy.rhs.valid()) copy.rhs = rename_expr(copy.rhs, names);
            rename_stmt(copy.body, names);
            out.items.push_back(std::move(copy));
        }
    }
};

Stmt lower(const VStmt& s, const Module& m) {
    switch (s.kind) {
        case VStmt::Kind::Null: return Stmt::skip();
        case VStmt::Kind::Block: {
            std::vector<Stmt> parts;
            for (const auto& c : s.body) parts.push_back(lower(c, m));
            return Stmt::seq(std::move(parts));
        }
        case VStmt::Kind::Assign: {
            const Decl* d = m.find(s.lhs);
            if (!d) throw SyntaxError("undeclared identifier '" + s.lhs + "'", s.span);
            if (d->storage != StorageClass::Register)
                throw UnsupportedConstruct("procedural assignment to net '" + s.lhs + "'", s.span);
            return s.blocking ? Stmt::blocking(s.lhs, s.expr) : Stmt::nonblocking(s.lhs, s.expr);
        }
        case VStmt::Kind::If:
            return Stmt::ite(s.expr, lower(s.body.at(0), m), s.body.size() > 1 ? lower(s.body[1], m) : Stmt::skip());
        case VStmt::Kind::Case: return lower(desugar(s), m);
    }
    return Stmt::skip();
}

void check_names(const Expr& e, const Module& m, const SourceSpan& sp) {
    for (const auto& v : free_vars(e))
        if (!m.find(v)) throw SyntaxError("undeclared identifier '" + v + "'", sp);
}

void check_stmt_names(const VStmt& s, const Module& m) {
    if (s.expr.valid()) check_names(s.expr, m, s.span);
    for (const auto& c : s.body) check_stmt_names(c, m);
    for (const auto& it : s.items) {
        for (const auto& l : it.labels) check_names(l, m, s.span);
        for (const auto& c : it.body) check_stmt_names(c, m);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::vector<Module> parse_verilog(const std::string& text, const std::string& filename) {
    return Parser(text, filename).file();
}

std::vector<Annotation> parse_annotations(const std::string& text, const std::string& filename) {
    static const std::regex re(
        R"(\b(source|sink|assume|init_eq|always_eq)\s*\(\s*([A-Za-z_][A-Za-z0-9_$]*)\s*(?:(==?)\s*([0-9][0-9_]*(?:'[bBoOdDhH][0-9a-fA-F_]+)?)\s*)?\))");
    std::vector<Annotation> out;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        size_t off = static_cast<size_t>(m.position(0));
        int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(off), '\n'));
        size_t bol = text.rfind('\n', off == 0 ? 0 : off - 1);
        int col = static_cast<int>(bol == std::string::npos || off == 0 ? off + 1 : off - bol);
        SourceSpan sp{filename, line, col, col + static_cast<int>(m.length(0))};
        std::string kind = m[1];
        Annotation a{Annotation::Kind::Source, m[2], 0, sp};
        bool has_value = m[4].matched;
        if (kind == "source")
            a.kind = Annotation::Kind::Source;
        else if (kind == "sink")
            a.kind = Annotation::Kind::Sink;
        else if (kind == "init_eq")
            a.kind = Annotation::Kind::InitEq;
        else if (kind == "always_eq")
            a.kind = Annotation::Kind::AlwaysEq;
        else
            a.kind = Annotation::Kind::Assume;
        if (a.kind == Annotation::Kind::Assume) {
            if (!has_value) throw SyntaxError("assume needs the form assume(x = constant)", sp);
            a.value = annotation_constant(m[4], sp);
        } else if (has_value) {
            throw SyntaxError(kind + " takes a single variable", sp);
        }
        out.push_back(a);
    }
    return out;
}

Module normalize(const std::vector<Module>& modules, const std::string& top) {
    std::map<std::string, const Module*> mods;
    for (const auto& m : modules) {
        if (mods.count(m.name)) throw SyntaxError("duplicate module '" + m.name + "'", m.span);
        mods[m.name] = &m;
    }
    std::string root = top;
    if (root.empty()) {
        std::set<std::string> used;
        for (const auto& m : modules)
            for (const auto& it : m.items)
                if (it.kind == Item::Kind::Instance) used.insert(it.module);
        std::vector<std::string> roots;
        for (const auto& m : modules)
            if (!used.count(m.name)) roots.push_back(m.name);
        if (roots.size() != 1)
            throw UnknownModule(roots.empty() ? "no top module found"
                                              : "several candidate top modules; choose one with --top");
        root = roots[0];
    }
    if (!mods.count(root)) throw UnknownModule("unknown module '" + root + "'");
    // Depth-first search for unknown modules and instantiation cycles.
    std::map<std::string, int> color;
    std::vector<std::string> stack;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
        color[n] = 1;
        stack.push_back(n);
        for (const auto& it : mods.at(n)->items) {
            if (it.kind != Item::Kind::Instance) continue;
            if (!mods.count(it.module)) throw UnknownModule("unknown module '" + it.module + "' instantiated in '" + n + "'");
            if (color[it.module] == 1) {
                std::string cyc;
                auto pos = std::find(stack.begin(), stack.end(), it.module);
                for (auto p = pos; p != stack.end(); ++p) cyc += *p + " -> ";
                throw CyclicInstantiation("cyclic instantiation: " + cyc + it.module);
            }
            if (color[it.module] == 0) visit(it.module);
        }
        stack.pop_back();
        color[n] = 2;
    };
    visit(root);
    Flattener f{mods, {}};
    return f.flatten(root);
}

void apply_annotations(AnnotationSet& set, const std::vector<Annotation>& annots, bool override_assumes) {
    auto push_unique = [](std::vector<Formula>& fs, Formula f) {
        if (std::find(fs.begin(), fs.end(), f) == fs.end()) fs.push_back(std::move(f));
    };
    for (const auto& a : annots) {
        switch (a.kind) {
            case Annotation::Kind::Source: set.sources.insert(a.var); break;
            case Annotation::Kind::Sink: set.sinks.insert(a.var); break;
            case Annotation::Kind::InitEq: push_unique(set.initial_eq, Formula{{Atom::eq_lr(a.var)}}); break;
            case Annotation::Kind::AlwaysEq: push_unique(set.always_eq, Formula{{Atom::eq_lr(a.var)}}); break;
            case Annotation::Kind::Assume:
                if (override_assumes) {
                    auto& fs = set.always_eq;
                    fs.erase(std::remove_if(fs.begin(), fs.end(),
                                            [&](const Formula& f) {
                                                return f.atoms.size() == 1 &&
                                                       f.atoms[0].kind == Atom::Kind::EqConst && f.atoms[0].x == a.var;
                                            }),
                             fs.end());
                }
                push_unique(set.always_eq, Formula{{Atom::eq_const(Side::Both, a.var, a.value)}});
                break;
        }
    }
}

std::pair<Program, AnnotationSet> translate(const Module& flat) {
    Program p;
    for (const auto& d : flat.decls) {
        if (d.width < 1 || d.width > 64)
            throw UnsupportedConstruct("signals wider than 64 bits are not supported", d.span);
        if (d.direction == Direction::Inout) throw UnsupportedConstruct("inout ports are not supported", d.span);
        // Top-level inputs are driven from outside; they are modeled as registers
        // so that they can act as sources.
        StorageClass st = d.direction == Direction::Input ? StorageClass::Register : d.storage;
        p.declare(d.name, st, d.width);
    }
    int id = 0;
    for (const auto& it : flat.items) {
        switch (it.kind) {
            case Item::Kind::Always:
                check_stmt_names(it.body, flat);
                p.processes.push_back({id++, ProcessKind::Sequential, lower(it.body, flat)});
                break;
            case Item::Kind::Assign: {
                const Decl* d = flat.find(it.lhs);
                if (!d) throw SyntaxError("undeclared identifier '" + it.lhs + "'", it.span);
                check_names(it.rhs, flat, it.span);
                if (d->storage == StorageClass::Register || d->direction == Direction::Input)
                    throw UnsupportedConstruct("continuous assignment to register '" + it.lhs + "'", it.span);
                p.processes.push_back({id++, ProcessKind::Continuous, Stmt::continuous(it.lhs, it.rhs)});
                break;
            }
            case Item::Kind::Instance:
                throw UnsupportedConstruct("module is not normalized", it.span);
        }
    }
    AnnotationSet a;
    apply_annotations(a, flat.annotations, false);
    return {std::move(p), std::move(a)};
}

std::pair<Program, AnnotationSet> load(const std::vector<std::pair<std::string, std::string>>& files,
                                       const std::string& top) {
    std::vector<Module> mods;
    for (const auto& [name, text] : files) {
        auto ms = parse_verilog(text, name);
        mods.insert(mods.end(), ms.begin(), ms.end());
    }
    return translate(normalize(mods, top));
}

}  // namespace ctlive::verilog
