#include "doctest.h"

#include "ctlive/error.hpp"
#include "ctlive/ir_text.hpp"
#include "ctlive/oracle.hpp"
#include "fixtures.hpp"

using namespace ctlive;

namespace {

std::pair<Program, AnnotationSet> passthrough() {
    return parse_program("reg in : 1;\nreg out : 1;\nsource in;\nsink out;\nprocess 0 {\n  out <= in;\n}\n");
}

std::pair<Program, AnnotationSet> multiplier_ct1() {
    auto pa = fixtures::multiplier();
    pa.second.always_eq.push_back(parse_formula("ct == 1"));
    return pa;
}

// Secret-dependent selection between a one-cycle and a two-cycle path.
std::pair<Program, AnnotationSet> rsa_pattern() {
    return parse_program(R"(reg c : 1;
reg e : 1;
reg m : 1;
reg prod : 1;
source e;
source m;
sink c;
process 0 {
  prod <= *(m, m);
  if (e) {
    c <= prod;
  } else {
    c <= m;
  }
}
)");
}

OracleConfig small(unsigned n) {
    OracleConfig cfg;
    cfg.n_cycles = n;
    return cfg;
}

uint64_t naive_count(const std::pair<Program, AnnotationSet>& pa, const OracleConfig& cfg) {
    return enumerate_pairs(pa.first, pa.second, cfg, [](const InputSchedule&, const InputSchedule&) { return true; });
}

// Checks a property the slow way: every yielded pair, every issue cycle.
bool naive_holds(const std::pair<Program, AnnotationSet>& pa, const OracleConfig& cfg, Property prop) {
    bool holds = true;
    enumerate_pairs(pa.first, pa.second, cfg, [&](const InputSchedule& l, const InputSchedule& r) {
        if (prop == Property::ConstantTime) {
            holds = check_ct_pair(run(pa.first, pa.second, l, std::nullopt, cfg.n_cycles),
                                  run(pa.first, pa.second, r, std::nullopt, cfg.n_cycles), pa.second.sinks);
        } else {
            for (uint64_t t = 0; t < cfg.n_cycles && holds; ++t)
                holds = check_liveq_pair(run(pa.first, pa.second, l, t, cfg.n_cycles),
                                         run(pa.first, pa.second, r, t, cfg.n_cycles), pa.second.sinks);
        }
        return holds;
    });
    return holds;
}

}  // namespace

TEST_CASE("enumerate_pairs: one source, one cycle, no assumptions") {
    auto [p, a] = passthrough();
    CHECK(naive_count({p, a}, small(1)) == 4);
    CHECK(enumerate_schedules(p, a, small(1)).size() == 2);
    CHECK(enumerate_schedules(p, a, small(3)).size() == 8);
    CHECK(naive_count({p, a}, small(3)) == 64);
    OracleConfig w2 = small(2);
    w2.width = 2;  // declared width 1 caps the domain
    CHECK(enumerate_schedules(p, a, w2).size() == 4);
}

TEST_CASE("enumerate_pairs: assume(ct = 1) filters both sides") {
    auto pa = multiplier_ct1();
    uint64_t n = 0;
    enumerate_pairs(pa.first, pa.second, small(2), [&](const InputSchedule& l, const InputSchedule& r) {
        CHECK(l.initial.at("ct") == 1);
        CHECK(r.initial.at("ct") == 1);
        ++n;
        return true;
    });
    // x, y over two cycles and the initial p1, flp_res: 64 schedules per side.
    CHECK(n == 64 * 64);
    // p1, flp_res and ct are read, so their initial values are enumerated.
    CHECK(enumerate_schedules(pa.first, pa.second, small(2)).size() == 128);
}

TEST_CASE("enumerate_pairs: init_eq constrains cycle 0 only") {
    auto [p, a] = passthrough();
    p.declare("acc", StorageClass::Register, 1);
    p.processes.push_back({1, ProcessKind::Sequential, Stmt::nonblocking("acc", parse_expr("^(acc, in)"))});
    a.initial_eq.push_back(parse_formula("acc.L == acc.R"));
    uint64_t n = 0, later_differs = 0;
    enumerate_pairs(p, a, small(3), [&](const InputSchedule& l, const InputSchedule& r) {
        CHECK(l.initial.at("acc") == r.initial.at("acc"));
        auto tl = run(p, a, l, std::nullopt, 3), tr = run(p, a, r, std::nullopt, 3);
        later_differs += tl.value(2, "acc") != tr.value(2, "acc");
        ++n;
        return true;
    });
    CHECK(n == 16 * 16 / 2);
    CHECK(later_differs > 0);
}

TEST_CASE("bucketed pair count equals the closed form and the naive count") {
    auto [p, a] = passthrough();
    CHECK(brute_force_ct(p, a, small(3)).pairs_checked == 64);
    CHECK(brute_force_liveq(p, a, small(3)).pairs_checked == 64 * 3);
    auto m = multiplier_ct1();
    CHECK(brute_force_ct(m.first, m.second, small(3)).pairs_checked == naive_count(m, small(3)));
    for (uint64_t seed = 1; seed <= 15; ++seed) {
        auto rp = random_program(seed);
        CAPTURE(print_program(rp.program, rp.annots));
        OracleConfig cfg = small(3);
        auto [ct, lq] = brute_force_both(rp.program, rp.annots, cfg);
        CHECK(ct.pairs_checked == naive_count({rp.program, rp.annots}, cfg));
        CHECK(ct.holds == naive_holds({rp.program, rp.annots}, cfg, Property::ConstantTime));
        CHECK(lq.holds == naive_holds({rp.program, rp.annots}, cfg, Property::LivenessEquivalent));
    }
}

TEST_CASE("brute_force_ct on the running example") {
    auto [p, a] = fixtures::multiplier();
    auto v = brute_force_ct(p, a);
    CHECK_FALSE(v.holds);
    REQUIRE(v.witness);
    CHECK(v.witness->sink == "out");
    // Runs that disagree on ct already diverge one cycle after issue.
    CHECK(v.witness->cycle == 1);
    CHECK(v.witness->left.initial.at("ct") != v.witness->right.initial.at("ct"));
    CHECK(v.witness->left_observation != v.witness->right_observation);
    CHECK(v.influence_violations == 0);
    CHECK(v.skipped_unknown_guards == 0);
    CHECK(v.schedules == uint64_t(1) << 15);

    // With ct unset on both sides the fast and slow paths differ at cycle k = 3.
    a.always_eq.push_back(parse_formula("ct == 0"));
    auto v0 = brute_force_ct(p, a);
    CHECK_FALSE(v0.holds);
    REQUIRE(v0.witness);
    CHECK(v0.witness->cycle == 3);
    CHECK(v0.witness->t == 0);
    std::set<std::string> obs{v0.witness->left_observation, v0.witness->right_observation};
    CHECK(obs.count("{0,2}") + obs.count("{2}") + obs.count("{0}") >= 1);

    auto ok = multiplier_ct1();
    auto v1 = brute_force_ct(ok.first, ok.second);
    CHECK(v1.holds);
    CHECK_FALSE(v1.witness);
    auto pt = passthrough();
    CHECK(brute_force_ct(pt.first, pt.second).holds);
}

TEST_CASE("brute_force_liveq on the running example") {
    auto [p, a] = fixtures::multiplier();
    auto v = brute_force_liveq(p, a);
    CHECK_FALSE(v.holds);
    REQUIRE(v.witness);
    CHECK(v.witness->t == 0);
    CHECK(v.witness->cycle == 1);
    a.always_eq.push_back(parse_formula("ct == 0"));
    auto v0 = brute_force_liveq(p, a);
    REQUIRE(v0.witness);
    CHECK(v0.witness->t == 0);
    CHECK(v0.witness->cycle == 3);
    CHECK(v0.witness->sink == "out");
    CHECK(v0.witness->left.initial.at("ct") == 0);
    auto ok = multiplier_ct1();
    CHECK(brute_force_liveq(ok.first, ok.second).holds);
    auto pt = passthrough();
    CHECK(brute_force_liveq(pt.first, pt.second).holds);
}

TEST_CASE("oracle witnesses replay") {
    auto [p, a] = fixtures::multiplier();
    auto [ct, lq] = brute_force_both(p, a);
    REQUIRE(ct.witness);
    REQUIRE(lq.witness);
    {
        const auto& w = *ct.witness;
        auto l = run(p, a, w.left, std::nullopt, 6), r = run(p, a, w.right, std::nullopt, 6);
        CHECK(l.influence(w.cycle, w.sink).str() == w.left_observation);
        CHECK(r.influence(w.cycle, w.sink).str() == w.right_observation);
        CHECK(l.influence(w.cycle, w.sink).contains(w.t) != r.influence(w.cycle, w.sink).contains(w.t));
        for (uint64_t i = 0; i < w.cycle; ++i) CHECK(l.influence(i, w.sink) == r.influence(i, w.sink));
    }
    {
        const auto& w = *lq.witness;
        auto l = run(p, a, w.left, w.t, 6), r = run(p, a, w.right, w.t, 6);
        CHECK(l.live(w.cycle, w.sink) != r.live(w.cycle, w.sink));
        CHECK((l.live(w.cycle, w.sink) ? "true" : "false") == w.left_observation);
    }
    auto j = ct.to_json();
    CHECK(j["property"] == "constant-time");
    CHECK(j["holds"] == false);
    CHECK(InputSchedule::from_json(j["witness"]["left"]) == ct.witness->left);
}

TEST_CASE("hand-built secret-dependent circuit fails both checks") {
    auto [p, a] = rsa_pattern();
    auto [ct, lq] = brute_force_both(p, a);
    CHECK_FALSE(ct.holds);
    CHECK_FALSE(lq.holds);
    CHECK(ct.influence_violations == 0);
}

TEST_CASE("domain limits") {
    auto [p, a] = fixtures::multiplier();
    OracleConfig cfg;
    cfg.max_schedules = 64;
    cfg.sample = false;
    CHECK_THROWS_AS(brute_force_ct(p, a, cfg), DomainTooLarge);
    cfg.sample = true;
    auto v = brute_force_ct(p, a, cfg);
    CHECK(v.sampled);
    CHECK(v.schedules == 64);
    OracleConfig wide;
    wide.width = 4;
    CHECK_THROWS_AS(brute_force_ct(p, a, wide), DomainTooLarge);
    OracleConfig late;
    late.issue_cycles = {7};
    CHECK_THROWS_AS(brute_force_liveq(p, a, late), DomainTooLarge);
}

TEST_CASE("threads do not change verdicts") {
    auto [p, a] = fixtures::multiplier();
    OracleConfig cfg;
    cfg.threads = 3;
    auto v = brute_force_ct(p, a, cfg);
    auto s = brute_force_ct(p, a);
    CHECK(v.to_json() == s.to_json());
}

TEST_CASE("random programs stay inside the generator's bounds") {
    for (uint64_t seed = 0; seed < 200; ++seed) {
        auto rp = random_program(seed);
        CAPTURE(seed);
        CHECK(validate_program(rp.program, rp.annots).empty());
        CHECK(rp.program.processes.size() <= 3);
        CHECK(rp.program.registers().size() <= 4);
        CHECK(rp.program.wires().size() <= 2);
        CHECK(!rp.annots.sources.empty());
        CHECK(!rp.annots.sinks.empty());
        std::map<std::string, int> writer;
        for (const auto& proc : rp.program.processes)
            for (const auto& s : assignments(proc.body)) {
                CHECK((!writer.count(s.lhs) || writer[s.lhs] == proc.id));
                writer[s.lhs] = proc.id;
            }
        for (const auto& [name, info] : rp.program.vars) CHECK(info.width == 1);
    }
    CHECK(random_program(7).program == random_program(7).program);
}

TEST_CASE("property_crosscheck") {
    CHECK(property_crosscheck(3, 0).cases.empty());
    auto rep = property_crosscheck(11, 12);
    CHECK(rep.cases.size() == 12);
    CHECK(rep.disagreements.empty());
    CHECK(rep.influence_violations == 0);
    size_t holding = 0;
    for (const auto& c : rep.cases) holding += c.ct;
    CHECK(holding > 0);
    CHECK(holding < rep.cases.size());
    CHECK(rep.to_json()["count"] == 12);
}
