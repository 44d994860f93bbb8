#include "doctest.h"

#include "ctlive/error.hpp"
#include "ctlive/pipeline.hpp"
#include "fixtures.hpp"

using namespace ctlive;

namespace {

RunConfig bench(Mode mode, const std::string& name) {
    RunConfig cfg;
    cfg.mode = mode;
    cfg.inputs.push_back(read_input("bench:" + name));
    cfg.timings = false;
    return cfg;
}

}  // namespace

TEST_CASE("modes, verdicts and exit codes") {
    for (Mode m : {Mode::Check, Mode::Simulate, Mode::Oracle, Mode::Races, Mode::Bmc, Mode::EmitIr, Mode::EmitVc})
        CHECK(parse_mode(mode_name(m)) == m);
    CHECK_THROWS_AS(parse_mode("prove"), Error);
    CHECK(exit_code(Verdict::Verified) == 0);
    CHECK(exit_code(Verdict::Violation) == 1);
    CHECK(exit_code(Verdict::CannotProve) == 2);
    CHECK(exit_code(Verdict::Racy) == 3);
    CHECK(exit_code(Verdict::IllFormed) == 3);
    CHECK(exit_code(Verdict::Error) == 4);
    CHECK(verdict_name(Verdict::IllFormed) == "Ill-formed");
}

TEST_CASE("read_input resolves bundled files") {
    CHECK(read_input("bench:fpu_mul").name == "fpu_mul.v");
    CHECK(read_input("bench:fpu_mul.annot").content.find("assume(ct = 1)") != std::string::npos);
    CHECK_THROWS_AS(read_input("bench:nope"), Error);
    CHECK_THROWS_AS(read_input("/nonexistent/file.v"), Error);
}

TEST_CASE("check: stages run in order and the report is schema-versioned") {
    RunConfig cfg = bench(Mode::Check, "fpu_mul");
    cfg.annot = InputFile{"ct.annot", "assume(ct = 1);"};
    cfg.timings = true;
    Report r = run_pipeline(cfg);
    REQUIRE(r.verdict);
    CHECK(*r.verdict == Verdict::Verified);
    std::vector<std::string> stages;
    for (const auto& [s, _] : r.timings_ms) stages.push_back(s);
    CHECK(stages == std::vector<std::string>{"parse", "validate", "races", "instrument", "product", "vcgen", "solve",
                                             "total"});
    auto j = r.to_json();
    CHECK(j["schema_version"] == kReportSchemaVersion);
    CHECK(j["version"] == tool_version());
    CHECK(j["assumptions"]["count"] == 1);
    CHECK(j["assumptions"]["always_eq"].size() == 1);
    CHECK(!j["invariant"].empty());
    CHECK(r.to_json(false).contains("timings_ms") == false);
}

TEST_CASE("check: the sidecar wins over source comments") {
    RunConfig cfg;
    cfg.timings = false;
    cfg.inputs.push_back({"m.ir", std::string(fixtures::kMultiplierIr) + "always_eq ct == 0;\n"});
    Report plain = run_pipeline(cfg);
    CHECK(*plain.verdict == Verdict::Violation);
    cfg.annot = InputFile{"ct.annot", "assume(ct = 1);"};
    Report r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::Verified);
    CHECK(r.details["assumptions"]["always_eq"].size() == 1);
}

TEST_CASE("check: CannotProve, then a bounded search") {
    RunConfig cfg = bench(Mode::Check, "fpu_mul");
    cfg.bmc_depth = 0;
    Report r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::CannotProve);
    CHECK(r.details["verifier"]["failing_clause"] == "assert live$out$L = live$out$R");
    cfg.bmc_depth = 6;
    r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::Violation);
    CHECK(r.details["witness"]["replayed"] == true);
    CHECK(r.details["witness"]["sink"] == "out");
}

TEST_CASE("check: hints") {
    RunConfig cfg = bench(Mode::Check, "swap_paths");
    cfg.bmc_depth = 0;
    CHECK(*run_pipeline(cfg).verdict == Verdict::CannotProve);
    cfg.hints = read_input("bench:swap_paths.hints");
    Report r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::Verified);
    CHECK(r.details["assumptions"]["hints"][0] == "live x = live y");
    cfg.hints = InputFile{"bad.hints", "live x = dead y\n"};
    CHECK(*run_pipeline(cfg).verdict == Verdict::IllFormed);
}

TEST_CASE("short circuits: racy and ill-formed designs") {
    Report r = run_pipeline(bench(Mode::Check, "racy_multiwriter"));
    CHECK(*r.verdict == Verdict::Racy);
    CHECK(r.details["races"]["race_free"] == false);
    CHECK(r.details["races"]["dynamic"]["findings"].size() >= 1);
    CHECK_FALSE(r.details.contains("verifier"));

    r = run_pipeline(bench(Mode::Check, "comb_loop"));
    CHECK(*r.verdict == Verdict::IllFormed);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].find("combinational loop") != std::string::npos);

    RunConfig bad;
    bad.inputs.push_back({"bad.v", "module m(input a; endmodule"});
    r = run_pipeline(bad);
    CHECK(*r.verdict == Verdict::IllFormed);
    CHECK(r.diagnostics[0].find("bad.v:1") != std::string::npos);

    RunConfig none;
    CHECK(*run_pipeline(none).verdict == Verdict::Error);

    RunConfig ext = bench(Mode::Check, "a3");
    ext.solver = "external:/nonexistent/solver";
    CHECK(*run_pipeline(ext).verdict == Verdict::Error);
}

TEST_CASE("simulate: default schedule, explicit schedule and replay") {
    RunConfig cfg;
    cfg.mode = Mode::Simulate;
    cfg.inputs.push_back({"m.ir", fixtures::kMultiplierIr});
    cfg.sim_cycles = 4;
    Report r = run_pipeline(cfg);
    CHECK_FALSE(r.verdict);
    CHECK(r.details["trace"]["rows"].size() == 4);
    CHECK(r.output.rfind("cycle,issue,", 0) == 0);

    cfg.schedule_json = R"({"inputs": {"x": {"0": 1}, "y": {"0": 1}}, "initial": {"ct": 0, "p1": 0, "flp_res": 0, "out": 0}})";
    r = run_pipeline(cfg);
    CHECK(r.details["trace"]["rows"][3]["influence"]["out"] == nlohmann::json({0, 2}));

    RunConfig chk = cfg;
    chk.mode = Mode::Check;
    chk.schedule_json.reset();
    Report v = run_pipeline(chk);
    REQUIRE(*v.verdict == Verdict::Violation);
    cfg.schedule_json = v.to_json().dump();
    r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::Violation);
    CHECK(r.details["replay"]["diverges"] == true);

    cfg.schedule_json = "{not json";
    CHECK(*run_pipeline(cfg).verdict == Verdict::IllFormed);
}

TEST_CASE("oracle, races, bmc and emit modes") {
    RunConfig cfg = bench(Mode::Oracle, "fpu_mul");
    cfg.oracle.n_cycles = 4;
    Report r = run_pipeline(cfg);
    CHECK(*r.verdict == Verdict::Violation);
    CHECK(r.details["oracle"]["constant_time"]["holds"] == false);
    CHECK(r.details["oracle"]["liveness_equivalence"]["holds"] == false);
    CHECK(r.details.contains("witness"));

    r = run_pipeline(bench(Mode::Races, "a2"));
    CHECK_FALSE(r.verdict);
    CHECK(r.exit_code() == 0);
    CHECK(r.details["races"]["race_free"] == true);

    RunConfig b = bench(Mode::Bmc, "a3");
    CHECK(*run_pipeline(b).verdict == Verdict::CannotProve);

    RunConfig ir = bench(Mode::EmitIr, "fpu_mul");
    std::string input = run_pipeline(ir).output;
    CHECK(input.find("live$") == std::string::npos);
    ir.stage = "instrumented";
    CHECK(run_pipeline(ir).output.find("reg live$out : 1;") != std::string::npos);
    ir.stage = "product";
    CHECK(run_pipeline(ir).output.find("reg live$out$R : 1;") != std::string::npos);
    ir.stage = "bogus";
    CHECK(*run_pipeline(ir).verdict == Verdict::Error);

    RunConfig vc = bench(Mode::EmitVc, "fpu_mul");
    Report e = run_pipeline(vc);
    CHECK(e.output.rfind("(set-logic HORN)", 0) == 0);
    CHECK(e.output == run_pipeline(vc).output);
}
