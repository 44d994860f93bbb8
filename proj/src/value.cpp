#include "ctlive/value.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace ctlive {

uint64_t width_mask(unsigned width) { return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1; }

Value Value::of(uint64_t bits, unsigned width) { return Value{bits & width_mask(width), width, true}; }

std::string Value::str() const { return known ? std::to_string(bits) : "*"; }

void CycleSet::insert(uint64_t cycle) {
    if (cycle < 64) {
        low_ |= uint64_t{1} << cycle;
        return;
    }
    size_t word = cycle / 64 - 1;
    if (high_.size() <= word) high_.resize(word + 1, 0);
    high_[word] |= uint64_t{1} << (cycle % 64);
}

bool CycleSet::contains(uint64_t cycle) const {
    if (cycle < 64) return (low_ >> cycle) & 1;
    size_t word = cycle / 64 - 1;
    return word < high_.size() && ((high_[word] >> (cycle % 64)) & 1);
}

bool CycleSet::empty() const {
    return low_ == 0 && std::all_of(high_.begin(), high_.end(), [](uint64_t w) { return w == 0; });
}

size_t CycleSet::size() const {
    size_t n = static_cast<size_t>(std::popcount(low_));
    for (uint64_t w : high_) n += static_cast<size_t>(std::popcount(w));
    return n;
}

CycleSet& CycleSet::operator|=(const CycleSet& o) {
    low_ |= o.low_;
    if (!o.high_.empty()) {
        if (high_.size() < o.high_.size()) high_.resize(o.high_.size(), 0);
        for (size_t i = 0; i < o.high_.size(); ++i) high_[i] |= o.high_[i];
    }
    return *this;
}

std::vector<uint64_t> CycleSet::elements() const {
    std::vector<uint64_t> out;
    for (uint64_t w = low_; w; w &= w - 1) out.push_back(static_cast<uint64_t>(std::countr_zero(w)));
    for (size_t i = 0; i < high_.size(); ++i)
        for (uint64_t w = high_[i]; w; w &= w - 1)
            out.push_back((i + 1) * 64 + static_cast<uint64_t>(std::countr_zero(w)));
    return out;
}

std::string CycleSet::str() const {
    std::string s = "{";
    bool first = true;
    for (uint64_t c : elements()) {
        if (!first) s += ",";
        s += std::to_string(c);
        first = false;
    }
    return s + "}";
}

static size_t significant_words(const std::vector<uint64_t>& v) {
    size_t n = v.size();
    while (n > 0 && v[n - 1] == 0) --n;
    return n;
}

bool operator==(const CycleSet& a, const CycleSet& b) {
    if (a.low_ != b.low_) return false;
    size_t n = significant_words(a.high_);
    if (n != significant_words(b.high_)) return false;
    return std::equal(a.high_.begin(), a.high_.begin() + static_cast<long>(n), b.high_.begin());
}

bool operator<(const CycleSet& a, const CycleSet& b) { return a.elements() < b.elements(); }

Op op_of_symbol(const std::string& symbol) {
    static const std::unordered_map<std::string, Op> table = {
        {"==", Op::Eq},       {"!=", Op::Ne},      {"<", Op::Lt},         {"<=", Op::Le},     {">", Op::Gt},
        {">=", Op::Ge},       {"+", Op::Add},      {"-", Op::Sub},        {"*", Op::Mul},     {"&", Op::BitAnd},
        {"|", Op::BitOr},     {"^", Op::BitXor},   {"~", Op::BitNot},     {"&&", Op::LogAnd}, {"||", Op::LogOr},
        {"!", Op::LogNot},    {"<<", Op::Shl},     {">>", Op::Shr},       {"?:", Op::Ite},    {"concat", Op::Concat},
        {"slice", Op::Slice},
    };
    auto it = table.find(symbol);
    return it == table.end() ? Op::Uninterpreted : it->second;
}

Value apply_op(Op op, const Value* a, size_t n, unsigned w, uint64_t slice_lo) {
    if (op == Op::Uninterpreted) return Value::unknown(w);
    for (size_t i = 0; i < n; ++i)
        if (!a[i].known) return Value::unknown(w);
    auto b = [&](size_t i) { return a[i].bits; };
    auto truth = [&](size_t i) { return a[i].bits != 0; };
    switch (op) {
        case Op::Eq: return Value::of(b(0) == b(1), 1);
        case Op::Ne: return Value::of(b(0) != b(1), 1);
        case Op::Lt: return Value::of(b(0) < b(1), 1);
        case Op::Le: return Value::of(b(0) <= b(1), 1);
        case Op::Gt: return Value::of(b(0) > b(1), 1);
        case Op::Ge: return Value::of(b(0) >= b(1), 1);
        case Op::Add: {
            uint64_t s = 0;
            for (size_t i = 0; i < n; ++i) s += b(i);
            return Value::of(s, w);
        }
        case Op::Sub: return n == 1 ? Value::of(0 - b(0), w) : Value::of(b(0) - b(1), w);
        case Op::Mul: {
            uint64_t s = 1;
            for (size_t i = 0; i < n; ++i) s *= b(i);
            return Value::of(s, w);
        }
        case Op::BitAnd: {
            uint64_t s = ~uint64_t{0};
            for (size_t i = 0; i < n; ++i) s &= b(i);
            return Value::of(s, w);
        }
        case Op::BitOr: {
            uint64_t s = 0;
            for (size_t i = 0; i < n; ++i) s |= b(i);
            return Value::of(s, w);
        }
        case Op::BitXor: {
            uint64_t s = 0;
            for (size_t i = 0; i < n; ++i) s ^= b(i);
            return Value::of(s, w);
        }
        case Op::BitNot: return Value::of(~b(0), w);
        case Op::LogAnd: {
            bool r = true;
            for (size_t i = 0; i < n; ++i) r = r && truth(i);
            return Value::of(r, 1);
        }
        case Op::LogOr: {
            bool r = false;
            for (size_t i = 0; i < n; ++i) r = r || truth(i);
            return Value::of(r, 1);
        }
        case Op::LogNot: return Value::of(!truth(0), 1);
        case Op::Shl: return Value::of(b(1) >= a[0].width ? 0 : b(0) << b(1), w);
        case Op::Shr: return Value::of(b(1) >= a[0].width ? 0 : b(0) >> b(1), w);
        case Op::Ite: return Value::of(truth(0) ? b(1) : b(2), w);
        case Op::Concat: {
            uint64_t s = 0;
            for (size_t i = 0; i < n; ++i) s = (a[i].width >= 64 ? 0 : s << a[i].width) | b(i);
            return Value::of(s, w);
        }
        case Op::Slice: return Value::of(slice_lo >= 64 ? 0 : b(0) >> slice_lo, w);
        case Op::Uninterpreted: break;
    }
    return Value::unknown(w);
}

}  // namespace ctlive
