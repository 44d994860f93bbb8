#include "doctest.h"

#include <random>

#include "ctlive/benchmarks.hpp"
#include "ctlive/error.hpp"
#include "ctlive/instrument.hpp"
#include "ctlive/oracle.hpp"
#include "ctlive/semantics.hpp"
#include "ctlive/verilog.hpp"
#include "fixtures.hpp"

using namespace ctlive;

namespace {

std::pair<Program, AnnotationSet> load_bench(const std::string& name) {
    return verilog::load({{name + ".v", find_benchmark(name).verilog}});
}

const Stmt* find_assign(const Stmt& s, const std::string& lhs, size_t nth = 0) {
    for (const auto& site : assignments(s))
        if (site.lhs == lhs && nth-- == 0) return site.stmt;
    return nullptr;
}

// Random values for every source at every cycle and every register initially.
InputSchedule random_inputs(const Program& p, const AnnotationSet& a, size_t n, std::mt19937_64& rng) {
    InputSchedule s;
    for (const auto& r : p.registers()) {
        uint64_t m = width_mask(p.var(r).width);
        if (a.sources.count(r))
            for (size_t c = 0; c < n; ++c) s.set(c, r, rng() & m);
        else
            s.initial[r] = rng() & m;
    }
    return s;
}

// The instrumented program with source shadows driven as inputs: 1 at the
// issue cycle and 0 elsewhere.
std::pair<AnnotationSet, InputSchedule> monitor_inputs(const InstrumentedProgram& ip, const InputSchedule& s,
                                                       uint64_t t, size_t n) {
    AnnotationSet a = ip.annots;
    InputSchedule out = s;
    for (const auto& src : ip.annots.sources) {
        a.sources.insert(shadow_name(src));
        for (size_t c = 0; c < n; ++c) out.set(c, shadow_name(src), c == t);
    }
    for (const auto& [x, sh] : ip.shadow)
        if (!ip.annots.sources.count(x) && ip.program.var(x).is_register()) out.initial[sh] = 0;
    return {a, out};
}

bool shadow_bit(const Configuration& c, const std::string& v) {
    const Value& val = c.value(v);
    REQUIRE(val.known);
    return val.bits != 0;
}

// Intrinsic liveness against the shadow bits: registers at every label,
// everything after the cycle settles. Also checks semantics preservation.
void check_monitor(const Program& p, const AnnotationSet& annots, const InputSchedule& s, uint64_t t, size_t n) {
    auto ip = instrument(p, annots);
    auto [ia, is] = monitor_inputs(ip, s, t, n);
    auto mo = Machine::compile(p, annots);
    auto mi = Machine::compile(ip.program, ia);
    auto dense_o = DenseInputs::from(*mo, s, n);
    auto dense_i = DenseInputs::from(*mi, is, n);
    Configuration co(mo, dense_o), ci(mi, dense_i);
    for (size_t c = 0; c < n; ++c) {
        co.begin_cycle(c == t ? 1 : 0, dense_o);
        ci.begin_cycle(0, dense_i);
        for (const auto& r : p.registers()) {
            INFO("label " << c << " register " << r);
            CHECK(co.live(r) == shadow_bit(ci, shadow_name(r)));
            CHECK(co.value(r) == ci.value(r));
        }
        co.settle();
        ci.settle();
        for (const auto& [x, info] : p.vars) {
            INFO("settled cycle " << c << " var " << x);
            CHECK(co.value(x) == ci.value(x));
            if (info.is_wire() && !ci.value(shadow_name(x)).known) continue;  // undriven wire
            CHECK(co.live(x) == shadow_bit(ci, shadow_name(x)));
        }
    }
}

}  // namespace

TEST_CASE("instrument: shadow updates of the running example") {
    auto [p, a] = fixtures::multiplier();
    auto ip = instrument(p, a);
    CHECK(ip.program.var("live$iszero").is_wire());
    CHECK(ip.program.var("live$out").is_register());
    CHECK(ip.program.var("live$x").width == 1);
    CHECK(ip.annots == a);

    const auto& cont = ip.program.processes[0].body;
    REQUIRE(cont.kind == Stmt::Kind::Seq);
    CHECK(print_stmt(cont.children[1]) == "assign live$iszero := ||(live$x, live$y);\n");

    const auto& sel = ip.program.processes[2].body;
    // out <= 0 under !ct and iszero.
    const Stmt* zero_shadow = find_assign(sel, "live$out", 1);
    REQUIRE(zero_shadow);
    CHECK(zero_shadow->assign_kind == AssignKind::NonBlocking);
    CHECK(print_expr(zero_shadow->expr) == "||(live$ct, live$iszero)");
    CHECK(print_expr(find_assign(sel, "live$out", 0)->expr) == "||(live$flp_res, live$ct)");
    CHECK(print_expr(find_assign(sel, "live$out", 2)->expr) == "||(||(live$flp_res, live$ct), live$iszero)");

    Program q;
    q.declare("a", StorageClass::Register, 4);
    q.processes.push_back(Process{0, ProcessKind::Sequential, Stmt::blocking("a", Expr::constant(5))});
    auto iq = instrument(q, {});
    CHECK(print_stmt(iq.program.processes[0].body) == "a = 5;\nlive$a = 1'd0;\n");
}

TEST_CASE("instrument: every assignment is followed by one shadow assignment of its kind") {
    for (const auto& b : bundle_benchmarks()) {
        if (b.expected == "Ill-formed") continue;
        auto [p, a] = load_bench(b.name);
        auto ip = instrument(p, a);
        for (const auto& proc : ip.program.processes) {
            auto sites = assignments(proc.body);
            REQUIRE(sites.size() % 2 == 0);
            for (size_t i = 0; i < sites.size(); i += 2) {
                CHECK(sites[i + 1].lhs == shadow_name(sites[i].lhs));
                CHECK(sites[i + 1].kind == sites[i].kind);
            }
        }
        CHECK(validate_program(ip.program, ip.annots).empty());
    }
}

TEST_CASE("product: running example shape and obligations") {
    auto [p, a] = fixtures::multiplier();
    auto pp = build_product(instrument(p, a), a);
    const auto& first = pp.program.processes[0];
    REQUIRE(first.body.kind == Stmt::Kind::Seq);
    std::vector<std::string> lhs;
    for (const auto& s : first.body.children) {
        CHECK(s.assign_kind == AssignKind::Continuous);
        lhs.push_back(s.lhs);
    }
    CHECK(lhs == std::vector<std::string>{"iszero$L", "iszero$R", "live$iszero$L", "live$iszero$R"});
    CHECK(print_expr(first.body.children[1].expr) == "||(==(x$R, 0), ==(y$R, 0))");
    CHECK(pp.assertions == std::vector<std::pair<std::string, std::string>>{{"live$out$L", "live$out$R"}});
    CHECK(pp.program.vars.size() == 4 * p.vars.size());
    CHECK(pp.program.processes.size() == p.processes.size());
    CHECK(pp.program.processes[2].id == p.processes[2].id);
    CHECK(validate_program(pp.program, pp.product_annotations()).empty());

    auto ct = parse_formula("ct == 1");
    CHECK(print_expr(product_expr(ct)) == "&&(==(ct$L, 1), ==(ct$R, 1))");
    CHECK(print_expr(product_expr(Formula{{Atom::eq_lr("x")}})) == "==(x$L, x$R)");

    auto empty = build_product(instrument(Program{}, {}), {});
    CHECK(empty.program.processes.empty());
    CHECK(empty.assertions.empty());
}

TEST_CASE("instrument: monitor matches intrinsic liveness on the running example") {
    auto [p, a] = fixtures::multiplier();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 12; ++i) {
        auto s = random_inputs(p, a, 6, rng);
        check_monitor(p, a, s, i % 6, 6);
    }
}

TEST_CASE("instrument: monitor matches intrinsic liveness on benchmarks and random programs") {
    std::mt19937_64 rng(9);
    for (const char* name : {"fpu_mul", "a2", "a3", "rsa_modexp"}) {
        auto [p, a] = load_bench(name);
        for (int i = 0; i < 4; ++i) {
            INFO(name << " run " << i);
            check_monitor(p, a, random_inputs(p, a, 6, rng), i, 6);
        }
    }
    int checked = 0;
    for (uint64_t seed = 0; seed < 40 && checked < 20; ++seed) {
        auto rp = random_program(seed);
        auto s = random_inputs(rp.program, rp.annots, 5, rng);
        INFO("seed " << seed);
        check_monitor(rp.program, rp.annots, s, seed % 5, 5);
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("product: projections are runs of the instrumented program") {
    std::mt19937_64 rng(21);
    auto check = [&](const Program& p, const AnnotationSet& a) {
        const size_t n = 5;
        auto ip = instrument(p, a);
        auto pp = build_product(ip, a);
        auto sl = random_inputs(p, a, n, rng), sr = random_inputs(p, a, n, rng);
        uint64_t t = rng() % n;
        auto [ia, il] = monitor_inputs(ip, sl, t, n);
        auto ir = monitor_inputs(ip, sr, t, n).second;

        AnnotationSet pa = pp.product_annotations();
        InputSchedule ps;
        for (const auto& src : ia.sources) {
            pa.sources.insert(side_name(src, Side::L));
            pa.sources.insert(side_name(src, Side::R));
        }
        for (const auto& [k, v] : il.values) ps.set(k.first, side_name(k.second, Side::L), v);
        for (const auto& [k, v] : ir.values) ps.set(k.first, side_name(k.second, Side::R), v);
        for (const auto& [x, v] : il.initial) ps.initial[side_name(x, Side::L)] = v;
        for (const auto& [x, v] : ir.initial) ps.initial[side_name(x, Side::R)] = v;

        auto tp = run(pp.program, pa, ps, std::nullopt, n);
        auto tl = run(ip.program, ia, il, std::nullopt, n);
        auto tr = run(ip.program, ia, ir, std::nullopt, n);
        for (size_t c = 0; c < n; ++c)
            for (const auto& [x, info] : ip.program.vars) {
                if (!info.is_register()) continue;
                CHECK(tp.value(c, side_name(x, Side::L)) == tl.value(c, x));
                CHECK(tp.value(c, side_name(x, Side::R)) == tr.value(c, x));
            }
    };
    auto [p, a] = fixtures::multiplier();
    for (int i = 0; i < 5; ++i) check(p, a);
    for (uint64_t seed = 100; seed < 115; ++seed) {
        auto rp = random_program(seed);
        check(rp.program, rp.annots);
    }
}
