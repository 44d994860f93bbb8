#include "doctest.h"

#include <cstdlib>
#include <random>

#include "ctlive/benchmarks.hpp"
#include "ctlive/error.hpp"
#include "ctlive/instrument.hpp"
#include "ctlive/oracle.hpp"
#include "ctlive/vcgen.hpp"
#include "ctlive/verilog.hpp"
#include "fixtures.hpp"

using namespace ctlive;

namespace {

bool have_z3() { return std::system("command -v z3 >/dev/null 2>&1") == 0; }

std::pair<Program, AnnotationSet> load_bench(const std::string& name, bool sidecar = false) {
    const auto& b = find_benchmark(name);
    auto [p, a] = verilog::load({{name + ".v", b.verilog}});
    if (sidecar && b.annot) verilog::apply_annotations(a, verilog::parse_annotations(*b.annot), true);
    return {p, a};
}

ProductProgram product_of(const Program& p, const AnnotationSet& a) { return build_product(instrument(p, a), a); }

AnnotationSet with_ct(AnnotationSet a, uint64_t v) {
    a.always_eq.push_back(Formula{{Atom::eq_const(Side::Both, "ct", v)}});
    return a;
}

VerifierVerdict verify(const Program& p, const AnnotationSet& a, const std::vector<Hint>& hints = {},
                       smt::Backend* backend = nullptr) {
    auto hs = generate_horn(product_of(p, a), a);
    return houdini_solve(hs, predicate_universe(hs, hints), backend);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

// Runs the product in the interpreter (source shadows driven as inputs) and
// checks that the compiled next-state function maps each label to the next.
void check_transition(const Program& p, const AnnotationSet& a, uint64_t seed) {
    const size_t n = 5;
    std::mt19937_64 rng(seed);
    auto pp = product_of(p, a);
    auto tf = compile_cycle(pp);
    uint64_t t = rng() % n;
    AnnotationSet pa = pp.product_annotations();
    InputSchedule s;
    for (const auto& src : pp.sources)
        for (Side side : {Side::L, Side::R}) {
            pa.sources.insert(side_name(shadow_name(src), side));
            for (size_t c = 0; c < n; ++c) {
                s.set(c, side_name(src, side), rng() & width_mask(p.var(src).width));
                s.set(c, side_name(shadow_name(src), side), c == t);
            }
        }
    for (const auto& r : p.registers())
        if (!a.sources.count(r))
            for (Side side : {Side::L, Side::R}) {
                s.initial[side_name(r, side)] = rng() & width_mask(p.var(r).width);
                s.initial[side_name(shadow_name(r), side)] = 0;
            }
    Trace tr;
    try {
        tr = run(pp.program, pa, s, std::nullopt, n);
    } catch (const GuardUnknown&) {
        return;
    }
    const auto& tm = *tf.tm;
    for (size_t c = 0; c + 1 < n; ++c) {
        std::unordered_map<smt::Term, uint64_t> env;
        for (size_t i = 0; i + 1 < tf.state.size(); ++i) env[tf.pre[i]] = tr.value(c, tf.state[i].name).bits;
        env[tf.pre.back()] = c >= t;
        env[tf.issue] = c + 1 == t;
        for (smt::Term in : tf.inputs) {
            std::string name = tm.symbol_name(tm.node(in).symbol);
            if (name.size() > 3 && name.substr(name.size() - 3) == "!in")
                env[in] = tr.value(c + 1, name.substr(0, name.size() - 3)).bits;
        }
        for (size_t i = 0; i + 1 < tf.state.size(); ++i) {
            INFO("cycle " << c << " variable " << tf.state[i].name);
            CHECK(tm.evaluate(tf.next[i], env) == tr.value(c + 1, tf.state[i].name).bits);
        }
        CHECK(tm.evaluate(tf.next.back(), env) == (c + 1 >= t));
    }
}

}  // namespace

TEST_CASE("compile_cycle: state layout of the running example") {
    auto [p, a] = fixtures::multiplier();
    auto tf = compile_cycle(product_of(p, a));
    // ct, flp_res, out, p1, x, y: two copies and two shadows each, plus the issue bit.
    CHECK(tf.state.size() == 4 * 6 + 1);
    CHECK(tf.state[0].name == "ct$L");
    CHECK(tf.state[3].name == "live$ct$R");
    CHECK(tf.state.back().name == "issued");
    CHECK(tf.next.size() == tf.state.size());
    // flp_res <= p1 is a direct copy of the pre-state.
    CHECK(tf.next[tf.index("flp_res$L")] == tf.pre_var("p1$L"));
    // Source shadows are the issue bit on both sides.
    CHECK(tf.next[tf.index("live$x$L")] == tf.next[tf.index("live$y$R")]);
}

TEST_CASE("compile_cycle: wire cycles are rejected") {
    auto [p, a] = load_bench("comb_loop");
    try {
        compile_cycle(product_of(p, a));
        FAIL("expected CombinationalLoop");
    } catch (const CombinationalLoop& e) {
        CHECK(std::string(e.what()).find("{w}") != std::string::npos);
    }
}

TEST_CASE("compile_cycle: next-state function matches the interpreter") {
    auto [p, a] = fixtures::multiplier();
    for (uint64_t seed = 0; seed < 6; ++seed) check_transition(p, a, seed);
    for (const char* name : {"fpu_sign_case", "mips_stall", "riscv_csr", "rsa_modexp", "a2", "a3"}) {
        auto [q, qa] = load_bench(name);
        INFO(name);
        for (uint64_t seed = 0; seed < 4; ++seed) check_transition(q, qa, seed);
    }
    for (uint64_t seed = 0; seed < 30; ++seed) {
        auto rp = random_program(seed);
        INFO("random program " << seed);
        check_transition(rp.program, rp.annots, seed);
    }
}

TEST_CASE("generate_horn: clauses, channel and assertion") {
    auto [p, a] = fixtures::multiplier();
    auto hs = generate_horn(product_of(p, a), a);
    REQUIRE(hs.clauses.size() == 3);
    CHECK(hs.clauses[0].kind == HornClause::Kind::Init);
    CHECK(hs.clauses[1].kind == HornClause::Kind::Step);
    CHECK(hs.clauses[2].kind == HornClause::Kind::Assert);
    CHECK(hs.assertion_pairs == std::vector<std::pair<std::string, std::string>>{{"live$out$L", "live$out$R"}});
    const auto& tm = *hs.trans.tm;
    CHECK(hs.channel_pre == tm.tru());
    CHECK(tm.str(hs.assertion) == tm.str(const_cast<smt::TermManager&>(tm).mk_eq(hs.trans.pre_var("live$out$L"),
                                                                                hs.trans.pre_var("live$out$R"))));

    auto [m, ma] = load_bench("mips_stall", true);
    auto hm = generate_horn(product_of(m, ma), ma);
    auto& tmm = *hm.trans.tm;
    CHECK(hm.channel_post == tmm.mk_eq(hm.trans.post_var("IF_instr$L"), hm.trans.post_var("IF_instr$R")));

    // Without assumptions Init only resets the shadows.
    auto empty = generate_horn(product_of(p, {}), {});
    auto vars = empty.trans.tm->vars_of(empty.init);
    for (auto v : vars) CHECK(empty.trans.tm->symbol_name(empty.trans.tm->node(v).symbol).rfind("live$", 0) == 0);

    AnnotationSet bad = a;
    bad.always_eq.push_back(Formula{{Atom::eq_lr("iszero")}});
    CHECK_THROWS_AS(generate_horn(product_of(p, bad), bad), Error);
}

TEST_CASE("houdini: running example with and without the constant-time flag") {
    auto [p, a] = fixtures::multiplier();
    auto ok = verify(p, with_ct(a, 1));
    CHECK(ok.verified());
    CHECK(contains(ok.invariant, "live$flp_res$L = live$flp_res$R"));
    CHECK(contains(ok.invariant, "live$out$L = live$out$R"));

    auto bad = verify(p, a);
    CHECK_FALSE(bad.verified());
    CHECK(bad.failing_clause == "assert live$out$L = live$out$R");
    bool dropped_out = false;
    for (const auto& [pred, clause] : bad.dropped) dropped_out |= pred == "live$out$L = live$out$R" && clause == "step";
    CHECK(dropped_out);

    // Slow path forced off still leaks through the zero test.
    CHECK_FALSE(verify(p, with_ct(a, 0)).verified());
}

TEST_CASE("houdini: empty universe, monotone drops, hints") {
    auto [p, a] = fixtures::multiplier();
    auto hs = generate_horn(product_of(p, with_ct(a, 1)), with_ct(a, 1));
    auto none = houdini_solve(hs, PredicateUniverse{});
    CHECK_FALSE(none.verified());
    CHECK(none.failing_clause.rfind("assert", 0) == 0);

    auto pu = predicate_universe(hs);
    CHECK(pu.predicates.size() == 4 * 6);
    auto v = houdini_solve(hs, pu);
    CHECK(v.invariant.size() + v.dropped.size() == pu.predicates.size());
    CHECK(v.iterations <= pu.predicates.size() + 1);
    std::set<std::string> all;
    for (const auto& s : v.invariant) all.insert(s);
    for (const auto& d : v.dropped) all.insert(d.first);
    CHECK(all.size() == pu.predicates.size());

    auto [sw, swa] = load_bench("swap_paths");
    auto hints = parse_hints(*find_benchmark("swap_paths").hints);
    CHECK(hints == std::vector<Hint>{{"x", "y"}});
    CHECK_FALSE(verify(sw, swa).verified());
    auto with_hints = verify(sw, swa, hints);
    CHECK(with_hints.verified());
    CHECK(contains(with_hints.invariant, "live$x$L = live$y$L"));

    CHECK_THROWS_AS(parse_hints("live x == y\n"), SyntaxError);
    CHECK(parse_hints("# comment\n\n// other\n live a = live b;\n") == std::vector<Hint>{{"a", "b"}});
    CHECK_THROWS_AS(predicate_universe(hs, {{"x", "nosuch"}}), Error);
}

TEST_CASE("houdini: external solver agrees with the built-in checker") {
    if (!have_z3()) {
        MESSAGE("z3 not found; skipping");
        return;
    }
    auto z3 = smt::make_backend("external:z3 -in -smt2");
    auto [p, a] = fixtures::multiplier();
    for (auto ann : {a, with_ct(a, 1)}) {
        auto builtin = verify(p, ann);
        auto external = verify(p, ann, {}, z3.get());
        CHECK(builtin.verified() == external.verified());
        CHECK(builtin.invariant == external.invariant);
        CHECK(builtin.failing_clause == external.failing_clause);
    }
    for (uint64_t seed = 0; seed < 6; ++seed) {
        auto rp = random_program(seed);
        CHECK(verify(rp.program, rp.annots).invariant == verify(rp.program, rp.annots, {}, z3.get()).invariant);
    }
}

TEST_CASE("emit_smtlib: preamble, arity and determinism") {
    CHECK(emit_smtlib(HornSystem{}) == "(set-logic HORN)\n(check-sat)\n(exit)\n");
    auto [p, a] = fixtures::multiplier();
    auto pp = product_of(p, with_ct(a, 1));
    std::string text = emit_smtlib(generate_horn(pp, with_ct(a, 1)));
    CHECK(text.rfind("(set-logic HORN)\n(declare-fun Inv (", 0) == 0);
    auto decl = text.substr(0, text.find(") Bool)"));
    size_t arity = 0;
    for (size_t pos = 0; (pos = decl.find("(_ BitVec", pos)) != std::string::npos; ++pos) ++arity;
    CHECK(arity == 25);
    CHECK(emit_smtlib(generate_horn(pp, with_ct(a, 1))) == text);
    CHECK(text.find("(check-sat)") != std::string::npos);
}

TEST_CASE("emit_smtlib: an external Horn solver agrees on the running example") {
    if (!have_z3()) {
        MESSAGE("z3 not found; skipping");
        return;
    }
    auto [p, a] = fixtures::multiplier();
    auto ask = [](const std::string& script) {
        char path[] = "/tmp/ctlive-horn-XXXXXX";
        int fd = mkstemp(path);
        REQUIRE(fd >= 0);
        FILE* f = fdopen(fd, "w");
        fputs(script.c_str(), f);
        fclose(f);
        std::string cmd = std::string("z3 -T:60 -smt2 ") + path;
        FILE* pipe = popen(cmd.c_str(), "r");
        char buf[256] = {0};
        std::string out;
        while (fgets(buf, sizeof buf, pipe)) out += buf;
        pclose(pipe);
        std::remove(path);
        return out.substr(0, out.find('\n'));
    };
    CHECK(ask(emit_smtlib(generate_horn(product_of(p, with_ct(a, 1)), with_ct(a, 1)))) == "sat");
    CHECK(ask(emit_smtlib(generate_horn(product_of(p, a), a))) == "unsat");
}

TEST_CASE("bmc_refute: running example witnesses") {
    auto [p, a] = fixtures::multiplier();
    auto pp = product_of(p, a);
    CHECK_FALSE(bmc_refute(pp, a, 0, 1));
    auto w = bmc_refute(pp, a, 6, 1);
    REQUIRE(w);
    CHECK(w->sink == "out");
    Trace lt = run(p, a, w->left, w->t, 6), rt = run(p, a, w->right, w->t, 6);
    CHECK(lt.live(w->cycle, "out") != rt.live(w->cycle, "out"));

    auto ct1 = with_ct(a, 1);
    for (size_t d = 1; d <= 6; ++d) CHECK_FALSE(bmc_refute(product_of(p, ct1), ct1, d, 1));

    // With the slow path off, the leak needs the zero test three cycles later.
    auto ct0 = with_ct(a, 0);
    CHECK_FALSE(bmc_refute(product_of(p, ct0), ct0, 3, 1));
    auto w0 = bmc_refute(product_of(p, ct0), ct0, 4, 1);
    REQUIRE(w0);
    CHECK(w0->cycle == 3);
    CHECK(w0->t == 0);
    CHECK(w0->to_json()["sink"] == "out");
}

TEST_CASE("houdini and bmc agree with the oracle on random programs") {
    OracleConfig cfg;
    cfg.n_cycles = 4;
    int verified = 0, refuted = 0;
    for (uint64_t seed = 0; seed < 60; ++seed) {
        auto rp = random_program(seed);
        INFO("seed " << seed);
        auto oracle = brute_force_liveq(rp.program, rp.annots, cfg);
        auto v = verify(rp.program, rp.annots);
        if (v.verified()) {
            ++verified;
            CHECK(oracle.holds);
        }
        auto w = bmc_refute(product_of(rp.program, rp.annots), rp.annots, cfg.n_cycles, 1);
        if (w) ++refuted;
        if (!oracle.sampled && oracle.skipped_unknown_guards == 0) CHECK(bool(w) == !oracle.holds);
    }
    CHECK(verified > 5);
    CHECK(refuted > 5);
}

TEST_CASE("houdini is sound on the bundled benchmarks") {
    OracleConfig cfg;
    cfg.n_cycles = 4;
    for (const auto& b : bundle_benchmarks()) {
        if (b.expected == "Ill-formed" || b.expected == "Racy") continue;
        for (bool sidecar : {false, true}) {
            if (sidecar && !b.annot) continue;
            auto [p, a] = load_bench(b.name, sidecar);
            std::vector<Hint> hints = b.hints ? parse_hints(*b.hints) : std::vector<Hint>{};
            INFO(b.name << (sidecar ? " with sidecar" : ""));
            auto v = verify(p, a, hints);
            if (v.verified()) CHECK(brute_force_liveq(p, a, cfg).holds);
        }
    }
}
