#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "ctlive/error.hpp"
#include "ctlive/pipeline.hpp"

namespace {

void summarize(const ctlive::Report& r, std::ostream& os, bool timings) {
    const auto& d = r.details;
    if (r.verdict) os << "verdict: " << ctlive::verdict_name(*r.verdict) << "\n";
    for (const auto& m : r.diagnostics) os << "  " << m << "\n";
    if (d.contains("assumptions") && d["assumptions"]["count"].get<size_t>() > 0) {
        os << "assumptions:";
        for (const auto& f : d["assumptions"]["initial_eq"]) os << " init(" << f.get<std::string>() << ")";
        for (const auto& f : d["assumptions"]["always_eq"]) os << " always(" << f.get<std::string>() << ")";
        os << "\n";
    }
    if (d.contains("invariant")) {
        os << "invariant:\n";
        for (const auto& p : d["invariant"]) os << "  " << p.get<std::string>() << "\n";
    }
    if (d.contains("verifier") && !d["verifier"]["failing_clause"].get<std::string>().empty())
        os << "failing clause: " << d["verifier"]["failing_clause"].get<std::string>() << "\n";
    if (d.contains("witness")) {
        const auto& w = d["witness"];
        os << "witness: sink " << w["sink"].get<std::string>() << " diverges at cycle " << w["cycle"] << " (t = "
           << w["t"] << ")\n";
        os << "  left:  " << w["left"].dump() << "\n";
        os << "  right: " << w["right"].dump() << "\n";
    }
    if (d.contains("races") && d["races"]["race_free"].get<bool>()) os << "race-free\n";
    if (d.contains("replay")) os << "replay: " << d["replay"].dump() << "\n";
    if (timings)
        for (const auto& [stage, ms] : r.timings_ms) os << "  " << stage << ": " << ms << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constant-time checker for synchronous hardware designs"};
    app.set_version_flag("--version", ctlive::tool_version());
    app.require_subcommand(1);

    ctlive::RunConfig cfg;
    std::vector<std::string> files;
    std::string annot, hints, json_out, output, schedule;
    bool no_timings = false;
    int64_t issue = 0;

    const std::vector<std::pair<ctlive::Mode, std::string>> modes = {
        {ctlive::Mode::Check, "Verify constant-time execution"},
        {ctlive::Mode::Simulate, "Run the interpreter, or replay a witness"},
        {ctlive::Mode::Oracle, "Exhaustive check on a bounded domain"},
        {ctlive::Mode::Races, "Static and randomized race check"},
        {ctlive::Mode::Bmc, "Bounded search for a counterexample"},
        {ctlive::Mode::EmitIr, "Print the intermediate representation"},
        {ctlive::Mode::EmitVc, "Print the Horn clauses as SMT-LIB"},
    };
    for (const auto& [mode, help] : modes) {
        CLI::App* sub = app.add_subcommand(ctlive::mode_name(mode), help);
        sub->callback([&cfg, m = mode] { cfg.mode = m; });
        sub->add_option("files", files, "Verilog files, a .ir file, or bench:<name>")->required();
        sub->add_option("--top", cfg.top, "Top module");
        sub->add_option("--annot", annot, "Sidecar assumption file (wins over source comments)");
        sub->add_option("--hints", hints, "Liveness hints, one 'live x = live y' per line");
        sub->add_option("--solver", cfg.solver, "builtin, external:<command> or external:");
        sub->add_option("--json", json_out, "Write the JSON report here ('-' for stdout)");
        sub->add_option("--seed", cfg.seed, "Seed for randomized stages");
        sub->add_flag("--no-timings", no_timings, "Leave stage timings out of the report");
        sub->add_option("--bmc-depth", cfg.bmc_depth, "Bounded search depth (0 disables it after CannotProve)");
        sub->add_option("--bmc-width", cfg.bmc_width, "Bits per value in the bounded search");
        sub->add_option("--width", cfg.oracle.width, "Oracle: bits per enumerated value");
        sub->add_option("--cycles", cfg.oracle.n_cycles, "Oracle: horizon");
        sub->add_option("--max-schedules", cfg.oracle.max_schedules, "Oracle: enumeration cap");
        sub->add_option("--threads", cfg.oracle.threads, "Oracle: worker threads");
        sub->add_option("--trials", cfg.race_trials, "Races: randomized schedule trials");
        sub->add_option("--schedule", schedule, "Simulate: schedule, witness or report JSON file");
        sub->add_option("--sim-cycles", cfg.sim_cycles, "Simulate: number of labels");
        sub->add_option("--issue", issue, "Simulate: issue cycle (-1 for none)");
        sub->add_option("--stage", cfg.stage, "emit-ir: input, instrumented or product");
        sub->add_option("-o,--output", output, "emit-*: write the text here instead of stdout");
    }
    CLI11_PARSE(app, argc, argv);

    cfg.timings = !no_timings;
    cfg.sim_issue = issue < 0 ? std::nullopt : std::optional<uint64_t>(issue);

    ctlive::Report report;
    report.mode = cfg.mode;
    try {
        for (const auto& f : files) cfg.inputs.push_back(ctlive::read_input(f));
        if (!annot.empty()) cfg.annot = ctlive::read_input(annot);
        if (!hints.empty()) cfg.hints = ctlive::read_input(hints);
        if (!schedule.empty()) cfg.schedule_json = ctlive::read_input(schedule).content;
        report = ctlive::run_pipeline(cfg);
    } catch (const ctlive::Error& e) {
        report.verdict = ctlive::Verdict::IllFormed;
        report.diagnostics.push_back(e.what());
    }

    bool json_stdout = json_out == "-";
    if (!report.output.empty()) {
        if (!output.empty()) {
            std::ofstream(output, std::ios::binary) << report.output;
        } else if (!json_stdout) {
            std::cout << report.output;
        }
    }
    bool emit = cfg.mode == ctlive::Mode::EmitIr || cfg.mode == ctlive::Mode::EmitVc;
    std::ostream& human = (json_stdout || (emit && output.empty())) ? std::cerr : std::cout;
    summarize(report, human, cfg.timings);
    if (!json_out.empty()) {
        std::string text = report.to_json(cfg.timings).dump(2) + "\n";
        if (json_stdout) {
            std::cout << text;
        } else {
            std::ofstream out(json_out, std::ios::binary);
            if (!out) {
                std::cerr << "cannot write '" << json_out << "'\n";
                return 4;
            }
            out << text;
        }
    }
    return report.exit_code();
}
