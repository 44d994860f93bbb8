#include "doctest.h"

#include "ctlive/benchmarks.hpp"
#include "ctlive/error.hpp"
#include "ctlive/ir_text.hpp"
#include "ctlive/verilog.hpp"
#include "fixtures.hpp"

using namespace ctlive;
using namespace ctlive::verilog;

static const char* kRunningExample = R"(
// source(x); source(y); sink(out);
// assume(ct = 1);
module ex1(input clk, input x, input y, output reg out);
  reg flp_res, ct, p1;
  wire iszero;
  assign iszero = (x == 0) || (y == 0);
  always @(posedge clk) begin
    p1 <= x * y;
    flp_res <= p1;
  end
  always @(posedge clk) begin
    if (ct)
      out <= flp_res;
    else
      if (iszero)
        out <= 0;
      else
        out <= flp_res;
  end
endmodule
)";

static std::string message_of(const std::string& text) {
    try {
        parse_verilog(text);
    } catch (const SyntaxError& e) {
        return e.bare_message();
    }
    return "";
}

TEST_CASE("parse_verilog: running example items and annotations") {
    auto mods = parse_verilog(kRunningExample, "ex1.v");
    REQUIRE(mods.size() == 1);
    const auto& m = mods[0];
    int assigns = 0, always = 0;
    for (const auto& it : m.items) {
        assigns += it.kind == Item::Kind::Assign;
        always += it.kind == Item::Kind::Always;
    }
    CHECK(assigns == 1);
    CHECK(always == 2);
    REQUIRE(m.annotations.size() == 4);
    CHECK(m.annotations[0].kind == Annotation::Kind::Source);
    CHECK(m.annotations[0].var == "x");
    CHECK(m.annotations[1].var == "y");
    CHECK(m.annotations[2].kind == Annotation::Kind::Sink);
    CHECK(m.annotations[3].kind == Annotation::Kind::Assume);
    CHECK(m.annotations[3].var == "ct");
    CHECK(m.annotations[3].value == 1);
    CHECK(m.annotations[3].span.line == 3);
}

TEST_CASE("parse_verilog rejects constructs outside the subset") {
    CHECK(message_of("module m; reg x; initial begin x = 0; end endmodule") == "non-synthesizable construct");
    CHECK(message_of("module m; reg x; always @(posedge clk) x <= #1 0; endmodule") ==
          "intra-assignment delays are not supported");
    CHECK(message_of("module m; reg x; always @(posedge clk) #1 x <= 0; endmodule") ==
          "delays are not supported");
    CHECK(message_of("module m; reg x; always @(posedge clk) @(x) x <= 0; endmodule") ==
          "event controls inside statements are not supported");
    CHECK(message_of("module m; reg a, b; always @(posedge clk) {a, b} <= 0; endmodule") ==
          "multi-variable assignment targets are not supported");
    CHECK(message_of("module m; genvar i; endmodule") == "generate blocks are not supported");
    CHECK(message_of("module m; generate endgenerate endmodule") == "generate blocks are not supported");
    CHECK(message_of("module m #(parameter W = 1); endmodule") == "parameterized modules are not supported");
    CHECK(message_of("module m; wire w; assign w = 1'bx; endmodule") == "x/z values are not supported");
    CHECK_THROWS_AS(parse_verilog("module m; reg x; always @(posedge clk) for (;;) x <= 0; endmodule"),
                    UnsupportedConstruct);
}

TEST_CASE("syntax errors point at the offending line") {
    try {
        parse_verilog("module m;\n  reg x;\n  always @(posedge clk)\n    x <= ;\nendmodule\n", "bad.v");
        FAIL("expected an error");
    } catch (const SyntaxError& e) {
        CHECK(e.span().file == "bad.v");
        CHECK(e.span().line == 4);
        CHECK(std::string(e.what()).rfind("bad.v:4:", 0) == 0);
    }
}

TEST_CASE("empty module") {
    auto mods = parse_verilog("module empty; endmodule");
    REQUIRE(mods.size() == 1);
    CHECK(mods[0].items.empty());
    auto [p, a] = translate(normalize(mods, "empty"));
    CHECK(p.processes.empty());
    CHECK(a.empty());
}

TEST_CASE("translate: running example becomes three processes") {
    auto [p, a] = translate(normalize(parse_verilog(kRunningExample), "ex1"));
    REQUIRE(p.processes.size() == 3);
    CHECK(p.processes[0].kind == ProcessKind::Continuous);
    CHECK(p.processes[1].kind == ProcessKind::Sequential);
    CHECK(p.processes[2].kind == ProcessKind::Sequential);
    CHECK(p.processes[0].id == 0);
    CHECK(p.processes[2].id == 2);
    CHECK(validate_program(p, a).empty());
    CHECK(a.sources == std::set<std::string>{"x", "y"});
    CHECK(a.sinks == std::set<std::string>{"out"});
    REQUIRE(a.always_eq.size() == 1);
    CHECK(print_formula(a.always_eq[0]) == "ct == 1");
    // Same program as the hand-written IR, apart from the clock input.
    auto [q, qa] = fixtures::multiplier();
    p.vars.erase("clk");
    CHECK(p == q);
}

TEST_CASE("translate: bundled multiplier matches the hand-written IR") {
    auto [p, a] = load({{"fpu_mul.v", find_benchmark("fpu_mul").verilog}});
    auto [q, qa] = fixtures::multiplier();
    p.vars.erase("clk");
    CHECK(p == q);
    CHECK(a == qa);
}

TEST_CASE("translate: single assign and two always blocks") {
    auto [p, a] = load({{"t.v", "module t(input a, output w); assign w = !a; endmodule"}});
    REQUIRE(p.processes.size() == 1);
    CHECK(p.processes[0].kind == ProcessKind::Continuous);
    CHECK(p.var("a").is_register());
    CHECK(p.var("w").is_wire());
    auto [p2, a2] = load({{"t.v", "module t(input clk, input a); reg r, s;\n"
                                  "always @(posedge clk) r <= a;\nalways @(negedge clk) s <= r;\nendmodule"}});
    REQUIRE(p2.processes.size() == 2);
    CHECK(p2.processes[0].id != p2.processes[1].id);
    CHECK(p2.processes[1].kind == ProcessKind::Sequential);
}

TEST_CASE("normalize: edges are collapsed") {
    auto pos = load({{"t.v", "module t(input clk, input a); reg r; always @(posedge clk) r <= a; endmodule"}});
    auto neg = load({{"t.v", "module t(input clk, input a); reg r; always @(negedge clk) r <= a; endmodule"}});
    CHECK(pos.first == neg.first);
}

TEST_CASE("normalize: instances are inlined under prefixes") {
    const char* text = R"(
module B(input i, output reg o, input clk);
  reg state;
  always @(posedge clk) begin
    state <= i;
    o <= state;
  end
endmodule
module A(input clk, input a, output w0, output w1);
  B inst0(.i(a), .o(w0), .clk(clk));
  B inst1(a, w1, clk);
endmodule
)";
    auto flat = normalize(parse_verilog(text), "A");
    CHECK(flat.find("inst0$state"));
    CHECK(flat.find("inst1$state"));
    CHECK(flat.find("inst0$o"));
    CHECK(flat.find("inst1$i"));
    auto [p, a] = translate(flat);
    CHECK(validate_program(p, a).empty());
    CHECK(p.var("inst0$i").is_wire());
    CHECK(p.var("inst0$o").is_register());
    // two always blocks plus three port assignments per instance
    CHECK(p.processes.size() == 8);
    // Without --top the uninstantiated module is chosen.
    CHECK(normalize(parse_verilog(text)).name == "A");
}

TEST_CASE("normalize: unknown and cyclic instantiation") {
    CHECK_THROWS_AS(normalize(parse_verilog("module A; C c0(); endmodule"), "A"), UnknownModule);
    CHECK_THROWS_AS(normalize(parse_verilog("module A; endmodule"), "Z"), UnknownModule);
    CHECK_THROWS_AS(normalize(parse_verilog("module A; B b(); endmodule module B; A a(); endmodule"), "A"),
                    CyclicInstantiation);
}

TEST_CASE("normalize: case becomes an if/else chain") {
    auto flat = normalize(parse_verilog(find_benchmark("fpu_sign_case").verilog));
    auto [p, a] = translate(flat);
    const Stmt& body = p.processes[0].body;
    REQUIRE(body.kind == Stmt::Kind::If);
    CHECK(print_expr(body.expr) == "==(concat(slice(opa, 3, 3), slice(opb, 3, 3)), 2'd0)");
    const Stmt& second = body.else_branch();
    REQUIRE(second.kind == Stmt::Kind::If);
    CHECK(print_expr(second.expr) == "==(concat(slice(opa, 3, 3), slice(opb, 3, 3)), 2'd1)");
    const Stmt& third = second.else_branch();
    REQUIRE(third.kind == Stmt::Kind::If);
    CHECK(third.else_branch().kind == Stmt::Kind::Assign);
    CHECK(validate_program(p, a).empty());
}

TEST_CASE("sidecar annotations override source assumptions") {
    auto [p, a] = load({{"ex1.v", kRunningExample}});
    apply_annotations(a, parse_annotations("assume(ct == 0);\ninit_eq(p1);"), true);
    REQUIRE(a.always_eq.size() == 1);
    CHECK(print_formula(a.always_eq[0]) == "ct == 0");
    CHECK(print_formula(a.initial_eq[0]) == "p1.L == p1.R");
    CHECK_THROWS_AS(parse_annotations("assume(ct)"), SyntaxError);
    CHECK(parse_annotations("resource(x)").empty());
    CHECK(parse_annotations("assume(ct = 2'b10)")[0].value == 2);
}

TEST_CASE("every bundled benchmark translates to a well-formed program") {
    for (const auto& b : bundle_benchmarks()) {
        CAPTURE(b.name);
        auto mods = parse_verilog(b.verilog, b.name + ".v");
        auto flat = normalize(mods);
        auto [p, a] = translate(flat);
        CHECK(validate_program(p, a).empty());
        size_t expected_procs = 0;
        for (const auto& it : flat.items) expected_procs += it.kind != Item::Kind::Instance;
        CHECK(p.processes.size() == expected_procs);
        CHECK(p.vars.size() == flat.decls.size());
        for (const auto& d : flat.decls) CHECK(p.has_var(d.name));
        auto round = parse_program(print_program(p, a));
        CHECK(round.first == p);
        CHECK(round.second == a);
    }
    CHECK(bundle_benchmarks().size() == 11);
}
