#include "doctest.h"

#include "ctlive/error.hpp"
#include "ctlive/semantics.hpp"
#include "fixtures.hpp"

using namespace ctlive;

static InputSchedule multiplier_inputs(uint64_t x, uint64_t y, uint64_t ct) {
    InputSchedule s;
    s.set(0, "x", x);
    s.set(0, "y", y);
    s.initial["ct"] = ct;
    return s;
}

TEST_CASE("eval_expr follows the constant, variable and application rules") {
    std::map<std::string, VarState> env;
    env["x"] = VarState{Value::of(0, 1), true, CycleSet::single(3)};
    env["y"] = VarState{Value::of(1, 1), false, CycleSet::single(5)};
    auto c = eval_expr(Expr::constant(7), env);
    CHECK(c.value == Value::of(7, 3));
    CHECK_FALSE(c.live);
    CHECK(c.influence.empty());

    auto e = parse_expr("||(==(x, 0), ==(y, 0))");
    auto r = eval_expr(e, env);
    CHECK(r.value == Value::of(1, 1));
    CHECK(r.live);
    CHECK(r.influence.str() == "{3,5}");

    env["u"] = VarState{Value::unknown(4), false, {}};
    CHECK_FALSE(eval_expr(parse_expr("f(u, 3)"), env).value.known);
    CHECK_FALSE(eval_expr(parse_expr("+(u, 3)"), env).value.known);
    CHECK_FALSE(eval_expr(parse_expr("f(y, 3)"), env).value.known);
}

TEST_CASE("builtin operators at declared widths") {
    std::map<std::string, VarState> env;
    env["a"] = VarState{Value::of(13, 4), false, {}};
    env["b"] = VarState{Value::of(6, 4), false, {}};
    auto v = [&](const char* s) { return eval_expr(parse_expr(s), env).value; };
    CHECK(v("+(a, b)") == Value::of(3, 4));
    CHECK(v("-(b, a)") == Value::of(9, 4));
    CHECK(v("*(a, b)") == Value::of(14, 4));
    CHECK(v("~(a)") == Value::of(2, 4));
    CHECK(v("concat(a, b)") == Value::of(0xd6, 8));
    CHECK(v("slice(a, 3, 2)") == Value::of(3, 2));
    CHECK(v("<<(a, 1)") == Value::of(10, 4));
    CHECK(v("<<(a, 4)") == Value::of(0, 4));
    CHECK(v("?:(<(a, b), a, 8'd200)") == Value::of(200, 8));
    CHECK(v("&&(a, !(b))") == Value::of(0, 1));
}

TEST_CASE("micro_step: blocking, non-blocking and continuous steps") {
    Program p;
    p.declare("a", StorageClass::Register);
    p.declare("b", StorageClass::Register);
    p.declare("x", StorageClass::Register);
    p.declare("w", StorageClass::Wire);
    p.processes.push_back({0, ProcessKind::Continuous, Stmt::continuous("w", Expr::app("!", {Expr::var("x")}))});
    p.processes.push_back({1, ProcessKind::Sequential,
                           Stmt::seq({Stmt::blocking("a", Expr::constant(1)), Stmt::nonblocking("b", Expr::var("a")),
                                      Stmt::blocking("x", Expr::constant(1))})});
    AnnotationSet an;
    InputSchedule in;
    in.initial["x"] = 0;
    Configuration c(p, an, in);
    cycle_step(c, false, in);
    // Continuous assignments are pending at the start of every cycle.
    micro_step(c);
    CHECK(c.value("w") == Value::of(1, 1));
    micro_step(c);
    CHECK(c.value("a") == Value::of(1, 1));
    CHECK_FALSE(c.live("a"));
    CHECK(c.influence("a").empty());
    CHECK(c.in_events("a"));
    micro_step(c);
    CHECK(c.buffer_size(1) == 1);
    CHECK_FALSE(c.value("b").known);
    micro_step(c);  // x = 1 retriggers w
    CHECK(c.in_events("x"));
    micro_step(c);
    CHECK(c.value("w") == Value::of(0, 1));
    CHECK(c.in_events("w"));
    CHECK(c.in_events("x"));
    micro_step(c);  // buffer applied
    CHECK(c.value("b") == Value::of(1, 1));
    CHECK(c.buffer_size(1) == 0);
    CHECK_THROWS_AS(micro_step(c), NoEnabledStep);
}

TEST_CASE("cycle_step resets liveness and influence") {
    auto [p, a] = fixtures::multiplier();
    auto in = multiplier_inputs(1, 1, 0);
    Configuration c(p, a, in);
    auto l0 = cycle_step(c, true, in);
    CHECK(l0.issued());
    CHECK(c.live("x"));
    CHECK(c.live("y"));
    CHECK_FALSE(c.live("out"));
    CHECK_FALSE(c.live("flp_res"));
    CHECK_FALSE(c.live("iszero"));
    for (int i = 0; i < 4; ++i) {
        c.settle();
        cycle_step(c, false, in);
    }
    CHECK(c.cycle() == 4);
    CHECK_FALSE(c.live("x"));
    CHECK_FALSE(c.live("y"));
    c.settle();
    cycle_step(c, false, in);
    CHECK(c.influence("x").str() == "{5}");
    CHECK_FALSE(c.value("iszero").known);
}

TEST_CASE("multiplier traces for the fast path") {
    auto [p, a] = fixtures::multiplier();
    Trace t = run(p, a, multiplier_inputs(0, 1, 0), 0, 4);
    CHECK(t.influence(1, "out").str() == "{0}");
    CHECK(t.influence(3, "out").str() == "{2}");
    CHECK(t.live(1, "out"));
    CHECK_FALSE(t.live(2, "out"));
    CHECK_FALSE(t.live(3, "out"));
}

TEST_CASE("multiplier traces for the slow path") {
    auto [p, a] = fixtures::multiplier();
    Trace t = run(p, a, multiplier_inputs(1, 1, 0), 0, 4);
    CHECK(t.influence(1, "out").str() == "{0}");
    CHECK(t.influence(3, "out").str() == "{0,2}");
    CHECK(t.live(1, "out"));
    CHECK_FALSE(t.live(2, "out"));
    CHECK(t.live(3, "out"));
}

TEST_CASE("trace pair checks") {
    auto [p, a] = fixtures::multiplier();
    Trace fast = run(p, a, multiplier_inputs(0, 1, 0), 0, 4);
    Trace slow = run(p, a, multiplier_inputs(1, 1, 0), 0, 4);
    CHECK_FALSE(check_ct_pair(fast, slow, a.sinks));
    CHECK_FALSE(check_liveq_pair(fast, slow, a.sinks));
    CHECK(check_ct_pair(fast, fast, a.sinks));
    CHECK(check_liveq_pair(slow, slow, a.sinks));
    Trace ct1 = run(p, a, multiplier_inputs(0, 1, 1), 0, 4);
    Trace ct2 = run(p, a, multiplier_inputs(1, 1, 1), 0, 4);
    CHECK(check_ct_pair(ct1, ct2, a.sinks));
    CHECK(check_liveq_pair(ct1, ct2, a.sinks));
    Trace shorter = run(p, a, multiplier_inputs(0, 1, 0), 0, 3);
    CHECK_THROWS_AS(check_ct_pair(fast, shorter, a.sinks), LengthMismatch);
    Trace late = run(p, a, multiplier_inputs(0, 1, 0), 1, 4);
    CHECK_THROWS_AS(check_liveq_pair(fast, late, a.sinks), NotTTrace);
}

TEST_CASE("lanes agree with separate single-issue runs") {
    auto [p, a] = fixtures::multiplier();
    auto m = Machine::compile(p, a);
    InputSchedule in = multiplier_inputs(1, 0, 0);
    in.set(2, "x", 0);
    in.set(3, "y", 1);
    const size_t n = 6;
    DenseInputs d = DenseInputs::from(*m, in, n);
    std::vector<uint64_t> masks(n), lane_issue(n);
    for (size_t i = 0; i < n; ++i) {
        masks[i] = uint64_t{1} << i;
        lane_issue[i] = i;
    }
    Trace all = run_lanes(m, d, masks, n);
    CHECK(live_implies_influence(all, lane_issue));
    for (unsigned t = 0; t < n; ++t) {
        Trace one = run(p, a, in, t, n);
        CHECK(live_implies_influence(one, {t}));
        for (size_t i = 0; i < n; ++i)
            for (size_t v = 0; v < m->num_vars(); ++v) {
                CHECK(all[i].is_live(v, t) == one[i].is_live(v));
                CHECK(all[i].influence[v] == one[i].influence[v]);
                CHECK(all[i].store[v] == one[i].store[v]);
            }
    }
}

TEST_CASE("guard on an unknown value aborts the run") {
    auto [p, a] = fixtures::multiplier();
    InputSchedule in;
    in.set(0, "x", 1);
    in.set(0, "y", 1);
    CHECK_THROWS_AS(run(p, a, in, 0, 3), GuardUnknown);
}

TEST_CASE("self-dependent continuous assignment never settles") {
    auto [p, a] = parse_program("reg v : 1;\nwire w : 1;\nprocess 0 {\n  assign w := ^(w, v);\n}\n");
    InputSchedule in;
    in.initial["v"] = 1;
    CHECK_THROWS_AS(run(p, a, in, std::nullopt, 2), CombinationalLoop);
}

TEST_CASE("input policies") {
    auto [p, a] = fixtures::multiplier();
    InputSchedule in = multiplier_inputs(1, 1, 1);
    Trace held = run(p, a, in, std::nullopt, 3);
    CHECK(held.value(2, "x") == Value::of(1, 1));
    in.policy = InputPolicy::Unknown;
    Trace unk = run(p, a, in, std::nullopt, 3);
    CHECK_FALSE(unk.value(2, "x").known);
    CHECK(InputSchedule::from_json(in.to_json()) == in);
}

TEST_CASE("trace dumps") {
    auto [p, a] = fixtures::multiplier();
    Trace t = run(p, a, multiplier_inputs(1, 1, 0), 0, 4);
    std::string csv = trace_csv(t);
    CHECK(csv.rfind("cycle,issue,ct,tau(ct),iota(ct),", 0) == 0);
    CHECK(csv.find("\"{0,2}\"") != std::string::npos);
    auto j = trace_json(t);
    CHECK(j["rows"][3]["influence"]["out"] == nlohmann::json::array({0, 2}));
    CHECK(j["rows"][0]["issue"] == true);
}
