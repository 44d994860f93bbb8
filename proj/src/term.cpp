#include "ctlive/term.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace ctlive::smt {

uint64_t mask(unsigned width) { return width >= 64 ? ~uint64_t(0) : (uint64_t(1) << width) - 1; }

size_t TermManager::NodeHash::operator()(const Node& n) const {
    size_t h = static_cast<size_t>(n.kind) * 0x9e3779b97f4a7c15ULL;
    auto mix = [&](uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(n.width);
    mix(n.value);
    mix(n.symbol);
    for (auto a : n.args) mix(a);
    return h;
}

TermManager::TermManager() {
    symbols_.push_back("");
    false_ = intern(Node{Kind::Const, 0, 0, 0, {}});
    true_ = intern(Node{Kind::Const, 0, 1, 0, {}});
}

Term TermManager::intern(Node n) {
    auto it = table_.find(n);
    if (it != table_.end()) return it->second;
    Term t = static_cast<Term>(nodes_.size());
    nodes_.push_back(n);
    table_.emplace(std::move(n), t);
    return t;
}

uint32_t TermManager::symbol(const std::string& name) {
    auto it = symbol_ids_.find(name);
    if (it != symbol_ids_.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(symbols_.size());
    symbols_.push_back(name);
    symbol_ids_[name] = id;
    return id;
}

Term TermManager::bv(uint64_t value, unsigned width) {
    if (width == 0 || width > 64) throw std::invalid_argument("bit-vector width must be between 1 and 64");
    return intern(Node{Kind::Const, width, value & mask(width), 0, {}});
}

Term TermManager::var(const std::string& name, unsigned width) {
    return intern(Node{Kind::Var, width, 0, symbol(name), {}});
}

Term TermManager::apply(const std::string& fn, const std::vector<Term>& args, unsigned width) {
    return intern(Node{Kind::Apply, width, 0, symbol("@" + fn), args});
}

Term TermManager::mk_not(Term a) {
    const Node& n = nodes_[a];
    if (n.kind == Kind::Const) return boolean(n.value == 0);
    if (n.kind == Kind::Not) return n.args[0];
    return intern(Node{Kind::Not, 0, 0, 0, {a}});
}

Term TermManager::mk_and(std::vector<Term> args) {
    std::vector<Term> out;
    for (Term a : args) {
        const Node& n = nodes_[a];
        if (n.kind == Kind::Const) {
            if (n.value == 0) return false_;
            continue;
        }
        if (n.kind == Kind::And)
            out.insert(out.end(), n.args.begin(), n.args.end());
        else
            out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (Term a : out)
        if (nodes_[a].kind == Kind::Not && std::binary_search(out.begin(), out.end(), nodes_[a].args[0])) return false_;
    if (out.empty()) return true_;
    if (out.size() == 1) return out[0];
    return intern(Node{Kind::And, 0, 0, 0, std::move(out)});
}

Term TermManager::mk_or(std::vector<Term> args) {
    std::vector<Term> out;
    for (Term a : args) {
        const Node& n = nodes_[a];
        if (n.kind == Kind::Const) {
            if (n.value != 0) return true_;
            continue;
        }
        if (n.kind == Kind::Or)
            out.insert(out.end(), n.args.begin(), n.args.end());
        else
            out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (Term a : out)
        if (nodes_[a].kind == Kind::Not && std::binary_search(out.begin(), out.end(), nodes_[a].args[0])) return true_;
    if (out.empty()) return false_;
    if (out.size() == 1) return out[0];
    return intern(Node{Kind::Or, 0, 0, 0, std::move(out)});
}

Term TermManager::mk_ite(Term c, Term a, Term b) {
    if (width(a) != width(b)) throw std::invalid_argument("ite branches differ in sort");
    if (is_const(c)) return nodes_[c].value ? a : b;
    if (a == b) return a;
    if (nodes_[c].kind == Kind::Not) return mk_ite(nodes_[c].args[0], b, a);
    if (is_bool(a)) {
        if (a == true_ && b == false_) return c;
        if (a == false_ && b == true_) return mk_not(c);
        if (a == true_) return mk_or(c, b);
        if (b == false_) return mk_and(c, a);
        if (a == false_) return mk_and(mk_not(c), b);
        if (b == true_) return mk_or(mk_not(c), a);
    }
    // ite(c, ite(c, x, _), y) = ite(c, x, y)
    if (nodes_[a].kind == Kind::Ite && nodes_[a].args[0] == c) a = nodes_[a].args[1];
    if (nodes_[b].kind == Kind::Ite && nodes_[b].args[0] == c) b = nodes_[b].args[2];
    if (a == b) return a;
    return intern(Node{Kind::Ite, width(a), 0, 0, {c, a, b}});
}

Term TermManager::mk_eq(Term a, Term b) {
    if (width(a) != width(b)) throw std::invalid_argument("equality between different sorts");
    if (a == b) return true_;
    if (is_const(a) && is_const(b)) return boolean(nodes_[a].value == nodes_[b].value);
    if (is_bool(a)) {
        if (is_const(a)) std::swap(a, b);
        if (is_const(b)) return nodes_[b].value ? a : mk_not(a);
    }
    if (a > b) std::swap(a, b);
    return intern(Node{Kind::Eq, 0, 0, 0, {a, b}});
}

Term TermManager::bv_not(Term a) {
    const Node& n = nodes_[a];
    if (n.kind == Kind::Const) return bv(~n.value, n.width);
    if (n.kind == Kind::BvNot) return n.args[0];
    return intern(Node{Kind::BvNot, n.width, 0, 0, {a}});
}

Term TermManager::bv_binary(Kind k, Term a, Term b) {
    unsigned w = width(a);
    if (w == 0 || w != width(b)) throw std::invalid_argument("bit-vector operands differ in width");
    const Node &na = nodes_[a], &nb = nodes_[b];
    if (na.kind == Kind::Const && nb.kind == Kind::Const) {
        uint64_t x = na.value, y = nb.value, r = 0;
        switch (k) {
            case Kind::BvAnd: r = x & y; break;
            case Kind::BvOr: r = x | y; break;
            case Kind::BvXor: r = x ^ y; break;
            case Kind::BvAdd: r = x + y; break;
            case Kind::BvSub: r = x - y; break;
            case Kind::BvMul: r = x * y; break;
            case Kind::BvShl: r = y >= w ? 0 : x << y; break;
            case Kind::BvLshr: r = y >= w ? 0 : x >> y; break;
            default: throw std::invalid_argument("not a binary bit-vector operator");
        }
        return bv(r, w);
    }
    bool commutative = k == Kind::BvAnd || k == Kind::BvOr || k == Kind::BvXor || k == Kind::BvAdd || k == Kind::BvMul;
    if (commutative && a > b) std::swap(a, b);
    auto is_val = [&](Term t, uint64_t v) { return is_const(t) && nodes_[t].value == v; };
    switch (k) {
        case Kind::BvAnd:
            if (is_val(a, 0) || is_val(b, 0)) return bv(0, w);
            if (is_val(a, mask(w))) return b;
            if (is_val(b, mask(w)) || a == b) return a;
            break;
        case Kind::BvOr:
            if (is_val(a, 0)) return b;
            if (is_val(b, 0) || a == b) return a;
            if (is_val(a, mask(w)) || is_val(b, mask(w))) return bv(mask(w), w);
            break;
        case Kind::BvXor:
            if (is_val(a, 0)) return b;
            if (is_val(b, 0)) return a;
            if (a == b) return bv(0, w);
            break;
        case Kind::BvAdd:
            if (is_val(a, 0)) return b;
            if (is_val(b, 0)) return a;
            break;
        case Kind::BvSub:
            if (is_val(b, 0)) return a;
            if (a == b) return bv(0, w);
            break;
        case Kind::BvMul:
            if (is_val(a, 0) || is_val(b, 0)) return bv(0, w);
            if (is_val(a, 1)) return b;
            if (is_val(b, 1)) return a;
            break;
        case Kind::BvShl:
        case Kind::BvLshr:
            if (is_val(b, 0)) return a;
            if (is_val(a, 0)) return a;
            break;
        default: break;
    }
    return intern(Node{k, w, 0, 0, {a, b}});
}

Term TermManager::bv_ult(Term a, Term b) {
    if (width(a) != width(b) || width(a) == 0) throw std::invalid_argument("comparison operands differ in width");
    if (is_const(a) && is_const(b)) return boolean(nodes_[a].value < nodes_[b].value);
    if (a == b || (is_const(b) && nodes_[b].value == 0)) return false_;
    return intern(Node{Kind::BvUlt, 0, 0, 0, {a, b}});
}

Term TermManager::bv_ule(Term a, Term b) {
    if (width(a) != width(b) || width(a) == 0) throw std::invalid_argument("comparison operands differ in width");
    if (is_const(a) && is_const(b)) return boolean(nodes_[a].value <= nodes_[b].value);
    if (a == b || (is_const(a) && nodes_[a].value == 0)) return true_;
    return intern(Node{Kind::BvUle, 0, 0, 0, {a, b}});
}

Term TermManager::concat(Term hi, Term lo) {
    unsigned w = width(hi) + width(lo);
    if (width(hi) == 0 || width(lo) == 0 || w > 64) throw std::invalid_argument("bad concat widths");
    if (is_const(hi) && is_const(lo)) return bv((nodes_[hi].value << width(lo)) | nodes_[lo].value, w);
    return intern(Node{Kind::Concat, w, 0, 0, {hi, lo}});
}

Term TermManager::extract(Term a, unsigned lo, unsigned w) {
    unsigned aw = width(a);
    if (w == 0 || lo + w > aw) throw std::invalid_argument("extract out of range");
    if (lo == 0 && w == aw) return a;
    const Node& n = nodes_[a];
    if (n.kind == Kind::Const) return bv(n.value >> lo, w);
    if (n.kind == Kind::Extract) return extract(n.args[0], static_cast<unsigned>(n.value) + lo, w);
    if (n.kind == Kind::ZeroExt) {
        unsigned inner = width(n.args[0]);
        if (lo + w <= inner) return extract(n.args[0], lo, w);
        if (lo >= inner) return bv(0, w);
    }
    if (n.kind == Kind::Concat) {
        unsigned low_w = width(n.args[1]);
        if (lo + w <= low_w) return extract(n.args[1], lo, w);
        if (lo >= low_w) return extract(n.args[0], lo - low_w, w);
    }
    return intern(Node{Kind::Extract, w, lo, 0, {a}});
}

Term TermManager::resize(Term a, unsigned w) {
    unsigned aw = width(a);
    if (aw == 0) throw std::invalid_argument("resize of a boolean");
    if (w == aw) return a;
    if (w < aw) return extract(a, 0, w);
    if (is_const(a)) return bv(nodes_[a].value, w);
    if (nodes_[a].kind == Kind::ZeroExt) return resize(nodes_[a].args[0], w);
    return intern(Node{Kind::ZeroExt, w, 0, 0, {a}});
}

Term TermManager::truth(Term a) {
    if (is_bool(a)) return a;
    const Node& n = nodes_[a];
    if (n.kind == Kind::Ite && n.width == 1 && is_const(n.args[1]) && is_const(n.args[2]))
        return mk_ite(n.args[0], boolean(nodes_[n.args[1]].value), boolean(nodes_[n.args[2]].value));
    if (n.kind == Kind::ZeroExt) return truth(n.args[0]);
    return mk_not(mk_eq(a, bv(0, n.width)));
}

Term TermManager::substitute(Term t, const std::unordered_map<Term, Term>& map) {
    std::unordered_map<Term, Term> memo;
    std::function<Term(Term)> go = [&](Term x) -> Term {
        if (auto it = map.find(x); it != map.end()) return it->second;
        if (auto it = memo.find(x); it != memo.end()) return it->second;
        Node n = nodes_[x];
        if (n.args.empty()) return x;
        std::vector<Term> args;
        bool changed = false;
        for (Term a : n.args) {
            args.push_back(go(a));
            changed = changed || args.back() != a;
        }
        Term r = x;
        if (changed) {
            switch (n.kind) {
                case Kind::Not: r = mk_not(args[0]); break;
                case Kind::And: r = mk_and(args); break;
                case Kind::Or: r = mk_or(args); break;
                case Kind::Ite: r = mk_ite(args[0], args[1], args[2]); break;
                case Kind::Eq: r = mk_eq(args[0], args[1]); break;
                case Kind::BvNot: r = bv_not(args[0]); break;
                case Kind::BvUlt: r = bv_ult(args[0], args[1]); break;
                case Kind::BvUle: r = bv_ule(args[0], args[1]); break;
                case Kind::Concat: r = concat(args[0], args[1]); break;
                case Kind::Extract: r = extract(args[0], static_cast<unsigned>(n.value), n.width); break;
                case Kind::ZeroExt: r = resize(args[0], n.width); break;
                case Kind::Apply: r = intern(Node{Kind::Apply, n.width, 0, n.symbol, args}); break;
                default: r = bv_binary(n.kind, args[0], args[1]); break;
            }
        }
        memo[x] = r;
        return r;
    };
    return go(t);
}

uint64_t TermManager::evaluate(Term t, const std::unordered_map<Term, uint64_t>& vars,
                               const std::map<std::pair<uint32_t, std::vector<uint64_t>>, uint64_t>* functions) const {
    std::unordered_map<Term, uint64_t> memo;
    std::function<uint64_t(Term)> go = [&](Term x) -> uint64_t {
        if (auto it = memo.find(x); it != memo.end()) return it->second;
        const Node& n = nodes_[x];
        std::vector<uint64_t> a;
        if (n.kind != Kind::Ite)
            for (Term c : n.args) a.push_back(go(c));
        uint64_t m = n.width ? mask(n.width) : 1, r = 0;
        unsigned aw = n.args.empty() ? 0 : nodes_[n.args[0]].width;
        switch (n.kind) {
            case Kind::Const: r = n.value; break;
            case Kind::Var: {
                auto it = vars.find(x);
                r = it == vars.end() ? 0 : it->second;
                break;
            }
            case Kind::Not: r = !a[0]; break;
            case Kind::And:
                r = 1;
                for (auto v : a) r = r && v;
                break;
            case Kind::Or:
                r = 0;
                for (auto v : a) r = r || v;
                break;
            case Kind::Ite: r = go(n.args[0]) ? go(n.args[1]) : go(n.args[2]); break;
            case Kind::Eq: r = a[0] == a[1]; break;
            case Kind::BvNot: r = ~a[0]; break;
            case Kind::BvAnd: r = a[0] & a[1]; break;
            case Kind::BvOr: r = a[0] | a[1]; break;
            case Kind::BvXor: r = a[0] ^ a[1]; break;
            case Kind::BvAdd: r = a[0] + a[1]; break;
            case Kind::BvSub: r = a[0] - a[1]; break;
            case Kind::BvMul: r = a[0] * a[1]; break;
            case Kind::BvShl: r = a[1] >= aw ? 0 : a[0] << a[1]; break;
            case Kind::BvLshr: r = a[1] >= aw ? 0 : a[0] >> a[1]; break;
            case Kind::BvUlt: r = a[0] < a[1]; break;
            case Kind::BvUle: r = a[0] <= a[1]; break;
            case Kind::Concat: r = (a[0] << nodes_[n.args[1]].width) | a[1]; break;
            case Kind::Extract: r = a[0] >> n.value; break;
            case Kind::ZeroExt: r = a[0]; break;
            case Kind::Apply: {
                if (functions) {
                    auto it = functions->find({n.symbol, a});
                    if (it != functions->end()) r = it->second;
                }
                break;
            }
        }
        r &= m;
        memo[x] = r;
        return r;
    };
    return go(t);
}

std::vector<Term> TermManager::vars_of(const std::vector<Term>& ts) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<Term> out, stack(ts.begin(), ts.end());
    while (!stack.empty()) {
        Term x = stack.back();
        stack.pop_back();
        if (seen[x]) continue;
        seen[x] = 1;
        if (nodes_[x].kind == Kind::Var) out.push_back(x);
        for (Term a : nodes_[x].args) stack.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Term> TermManager::vars_of(Term t) const { return vars_of(std::vector<Term>{t}); }

std::string TermManager::str(Term t) const {
    const Node& n = nodes_[t];
    std::ostringstream os;
    static const char* names[] = {"const", "var", "not", "and", "or", "ite", "=", "bvnot", "bvand", "bvor",
                                  "bvxor", "bvadd", "bvsub", "bvmul", "bvshl", "bvlshr", "bvult", "bvule",
                                  "concat", "extract", "zext", "apply"};
    switch (n.kind) {
        case Kind::Const:
            if (n.width == 0) return n.value ? "true" : "false";
            os << n.value << "[" << n.width << "]";
            return os.str();
        case Kind::Var: return symbols_[n.symbol];
        default: break;
    }
    os << "(" << (n.kind == Kind::Apply ? symbols_[n.symbol].substr(1) : names[static_cast<int>(n.kind)]);
    if (n.kind == Kind::Extract) os << "@" << n.value;
    for (Term a : n.args) os << " " << str(a);
    os << ")";
    return os.str();
}

}  // namespace ctlive::smt
