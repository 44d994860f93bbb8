#include "ctlive/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "ctlive/benchmarks.hpp"
#include "ctlive/error.hpp"
#include "ctlive/instrument.hpp"
#include "ctlive/ir_text.hpp"
#include "ctlive/race.hpp"
#include "ctlive/semantics.hpp"
#include "ctlive/vcgen.hpp"
#include "ctlive/verilog.hpp"

#ifndef CTLIVE_VERSION
#define CTLIVE_VERSION "0.0.0"
#endif

namespace ctlive {

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Check: return "check";
        case Mode::Simulate: return "simulate";
        case Mode::Oracle: return "oracle";
        case Mode::Races: return "races";
        case Mode::Bmc: return "bmc";
        case Mode::EmitIr: return "emit-ir";
        case Mode::EmitVc: return "emit-vc";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::Check, Mode::Simulate, Mode::Oracle, Mode::Races, Mode::Bmc, Mode::EmitIr, Mode::EmitVc})
        if (mode_name(m) == name) return m;
    throw Error("unknown mode '" + name + "'");
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Verified: return "Verified";
        case Verdict::Violation: return "Violation";
        case Verdict::CannotProve: return "CannotProve";
        case Verdict::Racy: return "Racy";
        case Verdict::IllFormed: return "Ill-formed";
        case Verdict::Error: return "Error";
    }
    return "?";
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Verified: return 0;
        case Verdict::Violation: return 1;
        case Verdict::CannotProve: return 2;
        case Verdict::Racy:
        case Verdict::IllFormed: return 3;
        case Verdict::Error: return 4;
    }
    return 4;
}

std::string tool_version() { return CTLIVE_VERSION; }

InputFile read_input(const std::string& path) {
    const std::string prefix = "bench:";
    if (path.rfind(prefix, 0) == 0) {
        std::string name = path.substr(prefix.size());
        if (name.find('.') == std::string::npos) name += ".v";
        for (const auto& f : bundled_files())
            if (f.name == name) return {name, f.content};
        throw Error("no bundled benchmark file '" + name + "'");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return {path, ss.str()};
}

int Report::exit_code() const { return verdict ? ctlive::exit_code(*verdict) : 0; }

nlohmann::json Report::to_json(bool with_timings) const {
    nlohmann::json j = details;
    j["schema_version"] = kReportSchemaVersion;
    j["tool"] = "ctlive";
    j["version"] = tool_version();
    j["mode"] = mode_name(mode);
    j["verdict"] = verdict ? nlohmann::json(verdict_name(*verdict)) : nlohmann::json(nullptr);
    j["exit_code"] = exit_code();
    j["diagnostics"] = diagnostics;
    if (!output.empty()) j["output"] = output;
    if (with_timings) {
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [stage, ms] : timings_ms) t[stage] = ms;
        j["timings_ms"] = t;
    }
    return j;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Raised to stop the pipeline with a verdict.
struct Stop {
    Verdict verdict;
};

class Run {
public:
    Run(const RunConfig& cfg, Report& r) : cfg_(cfg), r_(r) {}

    template <class F>
    auto timed(const std::string& stage, F&& f) {
        auto start = std::chrono::steady_clock::now();
        struct Record {
            Report& r;
            std::string stage;
            std::chrono::steady_clock::time_point start;
            ~Record() {
                std::chrono::duration<double, std::milli> d = std::chrono::steady_clock::now() - start;
                r.timings_ms.emplace_back(stage, d.count());
            }
        } rec{r_, stage, start};
        return f();
    }

    void load() {
        timed("parse", [&] {
            if (cfg_.inputs.empty()) throw Error("no input files");
            bool ir = cfg_.inputs.size() == 1 && ends_with(cfg_.inputs[0].name, ".ir");
            if (ir) {
                std::tie(program_, annots_) = parse_program(cfg_.inputs[0].content, cfg_.inputs[0].name);
            } else {
                std::vector<std::pair<std::string, std::string>> files;
                for (const auto& f : cfg_.inputs) files.emplace_back(f.name, f.content);
                std::tie(program_, annots_) = verilog::load(files, cfg_.top);
            }
            if (cfg_.annot)
                verilog::apply_annotations(annots_, verilog::parse_annotations(cfg_.annot->content, cfg_.annot->name),
                                           true);
            if (cfg_.hints) hints_ = parse_hints(cfg_.hints->content, cfg_.hints->name);
        });
        echo_assumptions();
    }

    void validate() {
        timed("validate", [&] {
            auto diags = validate_program(program_, annots_);
            for (const auto& d : diags) r_.diagnostics.push_back(d.message + (d.subject.empty() ? "" : " (" + d.subject + ")"));
            if (!diags.empty()) throw Stop{Verdict::IllFormed};
            auto loop = find_wire_cycle(program_);
            if (!loop.empty()) {
                std::string names;
                for (const auto& w : loop) names += (names.empty() ? "" : ", ") + w;
                r_.diagnostics.push_back("combinational loop through wires {" + names + "}");
                throw Stop{Verdict::IllFormed};
            }
        });
    }

    // Static check; a dynamic witness is searched for when it flags a race.
    void race_gate(bool always_dynamic) {
        RaceReport st = timed("races", [&] { return static_races(program_); });
        nlohmann::json j;
        j["static"] = st.to_json();
        bool racy = !st.race_free();
        if (racy || always_dynamic) {
            RaceReport dy =
                timed("races_dynamic", [&] { return dynamic_differ(program_, annots_, cfg_.race_trials, cfg_.seed); });
            j["dynamic"] = dy.to_json();
            racy = racy || !dy.race_free();
        }
        j["race_free"] = !racy;
        r_.details["races"] = j;
        if (racy) {
            for (const auto& f : st.findings) r_.diagnostics.push_back(f.message);
            throw Stop{Verdict::Racy};
        }
    }

    void build_product() {
        timed("instrument", [&] { ip_ = instrument(program_, annots_); });
        timed("product", [&] { pp_ = ctlive::build_product(ip_, annots_); });
    }

    HornSystem horn() {
        return timed("vcgen", [&] { return generate_horn(pp_, annots_); });
    }

    nlohmann::json witness_json(const BmcWitness& w) {
        nlohmann::json j = w.to_json();
        size_t n = std::max<size_t>(w.depth, w.cycle + 1);
        Trace lt = run(program_, annots_, w.left, w.t, n), rt = run(program_, annots_, w.right, w.t, n);
        j["left_live"] = lt.live(w.cycle, w.sink);
        j["right_live"] = rt.live(w.cycle, w.sink);
        j["replayed"] = lt.live(w.cycle, w.sink) != rt.live(w.cycle, w.sink);
        return j;
    }

    void check() {
        load();
        validate();
        race_gate(false);
        build_product();
        HornSystem hs = horn();
        auto pu = predicate_universe(hs, hints_);
        r_.details["predicates"] = pu.predicates.size();
        std::unique_ptr<smt::Backend> backend;
        if (cfg_.solver != "builtin") backend = smt::make_backend(cfg_.solver);
        VerifierVerdict v = timed("solve", [&] { return houdini_solve(hs, pu, backend.get()); });
        r_.details["solver"] = backend ? backend->name() : "builtin";
        r_.details["verifier"] = v.to_json();
        if (v.verified()) {
            r_.details["invariant"] = v.invariant;
            throw Stop{Verdict::Verified};
        }
        if (cfg_.bmc_depth > 0) {
            auto w = timed("bmc", [&] { return bmc_refute(pp_, annots_, cfg_.bmc_depth, cfg_.bmc_width); });
            if (w) {
                r_.details["witness"] = witness_json(*w);
                throw Stop{Verdict::Violation};
            }
        }
        throw Stop{Verdict::CannotProve};
    }

    void bmc() {
        load();
        validate();
        race_gate(false);
        build_product();
        auto w = timed("bmc", [&] { return bmc_refute(pp_, annots_, cfg_.bmc_depth, cfg_.bmc_width); });
        r_.details["bmc"] = {{"depth", cfg_.bmc_depth}, {"width", cfg_.bmc_width}};
        if (w) {
            r_.details["witness"] = witness_json(*w);
            throw Stop{Verdict::Violation};
        }
        throw Stop{Verdict::CannotProve};
    }

    void races() {
        load();
        validate();
        race_gate(true);
    }

    void oracle() {
        load();
        validate();
        race_gate(false);
        OracleConfig oc = cfg_.oracle;
        oc.seed = cfg_.seed;
        auto [ct, lq] = timed("oracle", [&] { return brute_force_both(program_, annots_, oc); });
        r_.details["oracle"] = {{"constant_time", ct.to_json()}, {"liveness_equivalence", lq.to_json()}};
        if (ct.holds != lq.holds) r_.diagnostics.push_back("constant-time and liveness-equivalence verdicts differ");
        if (!lq.holds && lq.witness) r_.details["witness"] = r_.details["oracle"]["liveness_equivalence"]["witness"];
        else if (!ct.holds && ct.witness) r_.details["witness"] = r_.details["oracle"]["constant_time"]["witness"];
        throw Stop{ct.holds && lq.holds ? Verdict::Verified : Verdict::Violation};
    }

    void simulate() {
        load();
        validate();
        nlohmann::json sched = cfg_.schedule_json ? nlohmann::json::parse(*cfg_.schedule_json) : nlohmann::json();
        if (sched.is_object() && sched.contains("witness") && sched["witness"].is_object()) sched = sched["witness"];
        if (sched.is_object() && sched.contains("left") && sched.contains("right")) {
            replay(sched);
            return;
        }
        InputSchedule s = cfg_.schedule_json ? InputSchedule::from_json(sched) : zero_schedule();
        Trace tr = timed("simulate", [&] { return run(program_, annots_, s, cfg_.sim_issue, cfg_.sim_cycles); });
        r_.details["schedule"] = s.to_json();
        r_.details["issue"] = cfg_.sim_issue ? nlohmann::json(*cfg_.sim_issue) : nlohmann::json(nullptr);
        r_.details["trace"] = trace_json(tr);
        r_.output = trace_csv(tr);
    }

    void emit_ir() {
        load();
        validate();
        if (cfg_.stage == "input") {
            r_.output = print_program(program_, annots_);
        } else if (cfg_.stage == "instrumented") {
            build_product();
            r_.output = print_program(ip_.program, annots_);
        } else if (cfg_.stage == "product") {
            build_product();
            r_.output = print_program(pp_.program, pp_.product_annotations());
        } else {
            throw Error("unknown stage '" + cfg_.stage + "' (expected input, instrumented or product)");
        }
    }

    void emit_vc() {
        load();
        validate();
        race_gate(false);
        build_product();
        HornSystem hs = horn();
        r_.details["arity"] = hs.arity();
        r_.output = timed("emit", [&] { return emit_smtlib(hs); });
    }

private:
    void echo_assumptions() {
        nlohmann::json a;
        a["sources"] = annots_.sources;
        a["sinks"] = annots_.sinks;
        a["initial_eq"] = nlohmann::json::array();
        for (const auto& f : annots_.initial_eq) a["initial_eq"].push_back(print_formula(f));
        a["always_eq"] = nlohmann::json::array();
        for (const auto& f : annots_.always_eq) a["always_eq"].push_back(print_formula(f));
        a["hints"] = nlohmann::json::array();
        for (const auto& h : hints_) a["hints"].push_back("live " + h.x + " = live " + h.y);
        a["count"] = annots_.initial_eq.size() + annots_.always_eq.size();
        r_.details["assumptions"] = a;
    }

    InputSchedule zero_schedule() const {
        InputSchedule s;
        for (const auto& r : program_.registers()) {
            if (annots_.sources.count(r))
                s.set(0, r, 0);
            else
                s.initial[r] = 0;
        }
        return s;
    }

    void replay(const nlohmann::json& w) {
        InputSchedule l = InputSchedule::from_json(w.at("left")), rr = InputSchedule::from_json(w.at("right"));
        uint64_t t = w.at("t").get<uint64_t>(), cycle = w.at("cycle").get<uint64_t>();
        std::string sink = w.at("sink").get<std::string>();
        size_t n = std::max<size_t>(cfg_.sim_cycles, cycle + 1);
        auto [lt, rt] = timed("simulate", [&] {
            return std::make_pair(run(program_, annots_, l, t, n), run(program_, annots_, rr, t, n));
        });
        bool live_differs = lt.live(cycle, sink) != rt.live(cycle, sink);
        bool infl_differs = !(lt.influence(cycle, sink) == rt.influence(cycle, sink));
        r_.details["replay"] = {{"t", t},
                                {"cycle", cycle},
                                {"sink", sink},
                                {"left_live", lt.live(cycle, sink)},
                                {"right_live", rt.live(cycle, sink)},
                                {"left_influence", lt.influence(cycle, sink).elements()},
                                {"right_influence", rt.influence(cycle, sink).elements()},
                                {"diverges", live_differs || infl_differs}};
        r_.details["trace_left"] = trace_json(lt);
        r_.details["trace_right"] = trace_json(rt);
        if (live_differs || infl_differs) throw Stop{Verdict::Violation};
    }

    const RunConfig& cfg_;
    Report& r_;
    Program program_;
    AnnotationSet annots_;
    std::vector<Hint> hints_;
    InstrumentedProgram ip_;
    ProductProgram pp_;
};

}  // namespace

Report run_pipeline(const RunConfig& cfg) {
    Report r;
    r.mode = cfg.mode;
    r.details["top"] = cfg.top;
    r.details["inputs"] = nlohmann::json::array();
    for (const auto& f : cfg.inputs) r.details["inputs"].push_back(f.name);
    Run run(cfg, r);
    auto total_start = std::chrono::steady_clock::now();
    try {
        switch (cfg.mode) {
            case Mode::Check: run.check(); break;
            case Mode::Simulate: run.simulate(); break;
            case Mode::Oracle: run.oracle(); break;
            case Mode::Races: run.races(); break;
            case Mode::Bmc: run.bmc(); break;
            case Mode::EmitIr: run.emit_ir(); break;
            case Mode::EmitVc: run.emit_vc(); break;
        }
    } catch (const Stop& s) {
        r.verdict = s.verdict;
    } catch (const SyntaxError& e) {
        r.verdict = Verdict::IllFormed;
        r.diagnostics.push_back(e.what());
    } catch (const UnknownModule& e) {
        r.verdict = Verdict::IllFormed;
        r.diagnostics.push_back(e.what());
    } catch (const CyclicInstantiation& e) {
        r.verdict = Verdict::IllFormed;
        r.diagnostics.push_back(e.what());
    } catch (const CombinationalLoop& e) {
        r.verdict = Verdict::IllFormed;
        r.diagnostics.push_back(e.what());
    } catch (const nlohmann::json::exception& e) {
        r.verdict = Verdict::IllFormed;
        r.diagnostics.push_back(std::string("malformed JSON input: ") + e.what());
    } catch (const std::exception& e) {
        r.verdict = Verdict::Error;
        r.diagnostics.push_back(e.what());
    }
    std::chrono::duration<double, std::milli> d = std::chrono::steady_clock::now() - total_start;
    r.timings_ms.emplace_back("total", d.count());
    return r;
}

}  // namespace ctlive
