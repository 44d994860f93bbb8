#include "doctest.h"

#include "ctlive/benchmarks.hpp"
#include "ctlive/error.hpp"
#include "ctlive/ir_text.hpp"
#include "ctlive/oracle.hpp"
#include "ctlive/race.hpp"
#include "ctlive/verilog.hpp"
#include "fixtures.hpp"

using namespace ctlive;

namespace {

std::pair<Program, AnnotationSet> bench(const std::string& name) {
    return verilog::load({{name + ".v", find_benchmark(name).verilog}});
}

Stmt all_blocking(const Stmt& s) {
    Stmt out = s;
    if (s.is_assign() && s.assign_kind == AssignKind::NonBlocking) out.assign_kind = AssignKind::Blocking;
    for (auto& c : out.children) c = all_blocking(c);
    return out;
}

}  // namespace

TEST_CASE("static_races: multi-writer") {
    auto [p, a] = bench("racy_multiwriter");
    auto rep = static_races(p);
    REQUIRE(rep.findings.size() == 1);
    CHECK(rep.findings[0].kind == RaceKind::MultiWriter);
    CHECK(rep.findings[0].variables == std::vector<std::string>{"out"});
    CHECK(rep.findings[0].process_ids == std::vector<int>{0, 1});
    CHECK(rep.to_json()["verdict"] == "Racy");
}

TEST_CASE("static_races: blocking write read by another process") {
    auto [p, a] = bench("racy_readwrite");
    auto rep = static_races(p);
    REQUIRE(rep.findings.size() == 1);
    CHECK(rep.findings[0].kind == RaceKind::ReadWriteIntraCycle);
    CHECK(rep.findings[0].variables == std::vector<std::string>{"t"});
    CHECK(rep.findings[0].process_ids == std::vector<int>{0, 1});

    // The same read through a wire.
    auto [q, qa] = parse_program(R"(reg in : 1;
reg out : 1;
reg t : 1;
wire w : 1;
source in;
sink out;
process 0 {
  t = in;
}
process 1 {
  assign w := ~(t);
}
process 2 {
  out <= w;
}
)");
    auto rq = static_races(q);
    REQUIRE(rq.findings.size() == 1);
    CHECK(rq.findings[0].variables == std::vector<std::string>{"t", "w"});
    CHECK(rq.findings[0].process_ids == std::vector<int>{0, 2});
    CHECK_FALSE(dynamic_differ(q, qa, 50, 5).race_free());
}

TEST_CASE("static_races: the running example and bundled positives are race-free") {
    auto [p, a] = fixtures::multiplier();
    CHECK(static_races(p).race_free());
    for (const auto& b : bundle_benchmarks()) {
        if (b.expected == "Racy" || b.expected == "Ill-formed") continue;
        CAPTURE(b.name);
        auto [q, qa] = bench(b.name);
        CHECK(static_races(q).race_free());
        CHECK(dynamic_differ(q, qa, 100, 1).race_free());
    }
    CHECK(static_races(Program{}).race_free());
}

TEST_CASE("dynamic_differ finds replayable divergences") {
    for (const char* name : {"racy_multiwriter", "racy_readwrite"}) {
        CAPTURE(name);
        auto [p, a] = bench(name);
        auto rep = dynamic_differ(p, a, 100, 42);
        REQUIRE(rep.findings.size() == 1);
        const auto& f = rep.findings[0];
        CHECK(f.kind == RaceKind::DynamicDivergence);
        REQUIRE(f.replay_seed);
        CHECK(!f.process_ids.empty());
        auto again = replay_trial(p, a, *f.replay_seed);
        REQUIRE(again);
        CHECK(again->variables == f.variables);
        CHECK(again->cycle == f.cycle);
        CHECK(rep.to_json()["findings"][0]["replay_seed"] == *f.replay_seed);
    }
}

TEST_CASE("dynamic_differ with no trials") {
    auto [p, a] = bench("racy_multiwriter");
    CHECK(dynamic_differ(p, a, 0, 1).race_free());
}

TEST_CASE("dynamic findings are also static findings") {
    size_t dynamic_found = 0;
    for (uint64_t seed = 0; seed < 60; ++seed) {
        auto rp = random_program(seed);
        CAPTURE(seed);
        CHECK(static_races(rp.program).race_free());
        CHECK(dynamic_differ(rp.program, rp.annots, 10, seed).race_free());
        // Force every assignment to be blocking to provoke read/write races.
        Program q = rp.program;
        for (auto& proc : q.processes) proc.body = all_blocking(proc.body);
        auto dyn = dynamic_differ(q, rp.annots, 20, seed);
        if (!dyn.race_free()) {
            ++dynamic_found;
            CHECK_FALSE(static_races(q).race_free());
        }
    }
    CHECK(dynamic_found > 0);
}

TEST_CASE("wire cycles") {
    auto [p, a] = bench("comb_loop");
    CHECK(find_wire_cycle(p) == std::vector<std::string>{"w"});
    CHECK_THROWS_AS(wire_topological_order(p), CombinationalLoop);
    auto [q, qa] = parse_program(R"(reg r : 1;
wire a : 1;
wire b : 1;
wire c : 1;
process 0 {
  assign c := &(a, b);
  assign b := ~(a);
  assign a := r;
}
)");
    CHECK(find_wire_cycle(q).empty());
    CHECK(wire_topological_order(q) == std::vector<std::string>{"a", "b", "c"});
    auto [l, la] = parse_program("reg r : 1;\nwire a : 1;\nwire b : 1;\nprocess 0 {\n  assign a := b;\n}\nprocess 1 {\n  assign b := ^(a, r);\n}\n");
    auto cyc = find_wire_cycle(l);
    CHECK(std::set<std::string>(cyc.begin(), cyc.end()) == std::set<std::string>{"a", "b"});
}
