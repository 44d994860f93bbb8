#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctlive/benchmarks.hpp"
#include "ctlive/pipeline.hpp"

namespace py = pybind11;

namespace {

// options: JSON object with the RunConfig fields that differ from the defaults.
std::string run(const std::string& mode, const std::vector<std::pair<std::string, std::string>>& inputs,
                const std::string& options) {
    nlohmann::json o = options.empty() ? nlohmann::json::object() : nlohmann::json::parse(options);
    ctlive::RunConfig cfg;
    cfg.mode = ctlive::parse_mode(mode);
    for (const auto& [name, content] : inputs) cfg.inputs.push_back({name, content});
    auto file = [&](const char* key) -> std::optional<ctlive::InputFile> {
        if (!o.contains(key) || o[key].is_null()) return std::nullopt;
        return ctlive::InputFile{key, o[key].get<std::string>()};
    };
    cfg.annot = file("annot");
    cfg.hints = file("hints");
    cfg.top = o.value("top", cfg.top);
    cfg.solver = o.value("solver", cfg.solver);
    cfg.seed = o.value("seed", cfg.seed);
    cfg.bmc_depth = o.value("bmc_depth", cfg.bmc_depth);
    cfg.bmc_width = o.value("bmc_width", cfg.bmc_width);
    cfg.oracle.width = o.value("width", cfg.oracle.width);
    cfg.oracle.n_cycles = o.value("cycles", cfg.oracle.n_cycles);
    cfg.oracle.max_schedules = o.value("max_schedules", cfg.oracle.max_schedules);
    cfg.race_trials = o.value("trials", cfg.race_trials);
    if (o.contains("schedule") && !o["schedule"].is_null()) cfg.schedule_json = o["schedule"].dump();
    cfg.sim_cycles = o.value("sim_cycles", cfg.sim_cycles);
    if (o.contains("issue")) cfg.sim_issue = o["issue"].is_null() ? std::nullopt : std::optional<uint64_t>(o["issue"].get<uint64_t>());
    cfg.stage = o.value("stage", cfg.stage);
    cfg.timings = o.value("timings", cfg.timings);

    ctlive::Report r;
    {
        py::gil_scoped_release release;
        r = ctlive::run_pipeline(cfg);
    }
    return r.to_json(cfg.timings).dump();
}

}  // namespace

PYBIND11_MODULE(_ctlive, m) {
    m.doc() = "Constant-time checking of synchronous hardware designs";
    m.def("run", &run, py::arg("mode"), py::arg("inputs"), py::arg("options") = "",
          "Runs one pipeline mode on (name, text) inputs and returns the JSON report.");
    m.def("version", &ctlive::tool_version);
    m.def("bundled_files", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& f : ctlive::bundled_files()) out.emplace_back(f.name, f.content);
        return out;
    });
}
