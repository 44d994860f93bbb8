#include "ctlive/benchmarks.hpp"

#include "ctlive/error.hpp"

namespace ctlive {

namespace {

struct Meta {
    const char* name;
    const char* description;
    const char* expected;
    const char* expected_with_annot;
};

const Meta kMeta[] = {
    {"fpu_mul", "pipelined multiplier with a zero-operand fast path", "Violation", "Verified"},
    {"mips_stall", "decode stage with a load-use stall", "CannotProve", "Verified"},
    {"fpu_sign_case", "sign logic with diverging case arms", "Verified", ""},
    {"riscv_csr", "CSR access check that traps on illegal access", "Violation", "Verified"},
    {"rsa_modexp", "square-and-multiply step branching on the exponent bit", "Violation", ""},
    {"a2", "information-flow safe but not constant time", "Violation", ""},
    {"a3", "constant time but not information-flow safe", "Verified", ""},
    {"swap_paths", "crossbar whose proof needs a liveness hint", "CannotProve", "Verified"},
    {"racy_multiwriter", "two blocks drive one register", "Racy", ""},
    {"racy_readwrite", "blocking write read by another block", "Racy", ""},
    {"comb_loop", "self-dependent wire", "Ill-formed", ""},
};

const BundledFile* file(const std::string& name) {
    for (const auto& f : bundled_files())
        if (f.name == name) return &f;
    return nullptr;
}

}  // namespace

std::vector<Benchmark> bundle_benchmarks() {
    std::vector<Benchmark> out;
    for (const auto& m : kMeta) {
        const BundledFile* v = file(std::string(m.name) + ".v");
        if (!v) continue;
        Benchmark b;
        b.name = m.name;
        b.description = m.description;
        b.verilog = v->content;
        if (const auto* a = file(std::string(m.name) + ".annot")) b.annot = a->content;
        if (const auto* h = file(std::string(m.name) + ".hints")) b.hints = h->content;
        b.expected = m.expected;
        b.expected_with_annot = m.expected_with_annot;
        out.push_back(std::move(b));
    }
    return out;
}

const Benchmark& find_benchmark(const std::string& name) {
    static const std::vector<Benchmark> all = bundle_benchmarks();
    for (const auto& b : all)
        if (b.name == name) return b;
    throw Error("unknown benchmark '" + name + "'");
}

}  // namespace ctlive
