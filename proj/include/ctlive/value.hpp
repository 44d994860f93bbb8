#pragma once

// Concrete values, influence sets and the bit-vector meaning of the builtin
// function symbols.

#include <cstdint>
#include <string>
#include <vector>

namespace ctlive {

struct Value {
    uint64_t bits = 0;
    unsigned width = 1;
    bool known = false;

    static Value unknown(unsigned width = 1) { return Value{0, width, false}; }
    static Value of(uint64_t bits, unsigned width);

    std::string str() const;
    friend bool operator==(const Value& a, const Value& b) {
        return a.known == b.known && a.width == b.width && (!a.known || a.bits == b.bits);
    }
    friend bool operator!=(const Value& a, const Value& b) { return !(a == b); }
};

uint64_t width_mask(unsigned width);

/// Set of cycle indices. The first 64 cycles live in an inline word.
class CycleSet {
public:
    CycleSet() = default;
    static CycleSet single(uint64_t cycle) {
        CycleSet s;
        s.insert(cycle);
        return s;
    }

    void insert(uint64_t cycle);
    bool contains(uint64_t cycle) const;
    bool empty() const;
    size_t size() const;
    void clear() {
        low_ = 0;
        high_.clear();
    }
    CycleSet& operator|=(const CycleSet& o);
    std::vector<uint64_t> elements() const;
    /// "{0,2}" style rendering.
    std::string str() const;

    friend bool operator==(const CycleSet& a, const CycleSet& b);
    friend bool operator!=(const CycleSet& a, const CycleSet& b) { return !(a == b); }
    friend bool operator<(const CycleSet& a, const CycleSet& b);

private:
    uint64_t low_ = 0;
    std::vector<uint64_t> high_;
};

enum class Op {
    Eq, Ne, Lt, Le, Gt, Ge,
    Add, Sub, Mul,
    BitAnd, BitOr, BitXor, BitNot,
    LogAnd, LogOr, LogNot,
    Shl, Shr,
    Ite, Concat, Slice,
    Uninterpreted,
};

Op op_of_symbol(const std::string& symbol);

/// Applies a builtin operator. Any unknown argument, and any uninterpreted
/// symbol, yields an unknown result of the given width.
Value apply_op(Op op, const Value* args, size_t n, unsigned result_width, uint64_t slice_lo = 0);

}  // namespace ctlive
