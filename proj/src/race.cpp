#include "ctlive/race.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "ctlive/error.hpp"

namespace ctlive {

std::string race_kind_name(RaceKind k) {
    switch (k) {
        case RaceKind::MultiWriter: return "MultiWriter";
        case RaceKind::ReadWriteIntraCycle: return "ReadWriteIntraCycle";
        case RaceKind::DynamicDivergence: return "DynamicDivergence";
    }
    return "";
}

nlohmann::json RaceReport::to_json() const {
    nlohmann::json j;
    j["verdict"] = race_free() ? "RaceFree" : "Racy";
    auto arr = nlohmann::json::array();
    for (const auto& f : findings) {
        nlohmann::json e{{"kind", race_kind_name(f.kind)},
                         {"variables", f.variables},
                         {"process_ids", f.process_ids},
                         {"message", f.message}};
        e["replay_seed"] = f.replay_seed ? nlohmann::json(*f.replay_seed) : nlohmann::json(nullptr);
        if (f.cycle) e["cycle"] = *f.cycle;
        arr.push_back(e);
    }
    j["findings"] = arr;
    return j;
}

RaceReport static_races(const Program& p) {
    RaceReport rep;
    std::map<std::string, std::vector<int>> writers;
    std::map<std::string, std::set<int>> blocking;
    for (const auto& proc : p.processes)
        for (const auto& s : assignments(proc.body)) {
            auto& w = writers[s.lhs];
            if (w.empty() || w.back() != proc.id) w.push_back(proc.id);
            if (s.kind == AssignKind::Blocking) blocking[s.lhs].insert(proc.id);
        }
    for (const auto& [var, ids] : writers) {
        if (ids.size() < 2) continue;
        RaceFinding f;
        f.kind = RaceKind::MultiWriter;
        f.variables = {var};
        f.process_ids = ids;
        f.message = "'" + var + "' is assigned in " + std::to_string(ids.size()) + " processes";
        rep.findings.push_back(f);
    }

    // Registers each wire depends on, transitively.
    std::map<std::string, std::set<std::string>> wire_regs;
    std::map<std::string, std::set<std::string>> direct;
    for (const auto& proc : p.processes)
        for (const auto& s : assignments(proc.body))
            if (s.kind == AssignKind::Continuous)
                for (const auto& v : free_vars(s.stmt->expr)) direct[s.lhs].insert(v);
    for (const auto& w : p.wires()) {
        std::set<std::string> seen{w};
        std::vector<std::string> work{w};
        while (!work.empty()) {
            auto cur = work.back();
            work.pop_back();
            for (const auto& v : direct[cur]) {
                if (!seen.insert(v).second) continue;
                if (p.has_var(v) && p.var(v).is_wire())
                    work.push_back(v);
                else
                    wire_regs[w].insert(v);
            }
        }
    }
    for (const auto& [reg, procs] : blocking)
        for (int writer : procs)
            for (const auto& q : p.processes) {
                if (q.id == writer || q.kind != ProcessKind::Sequential) continue;
                bool reads = false;
                std::string via;
                for (const auto& v : read_vars(q.body)) {
                    if (v == reg) reads = true;
                    auto it = wire_regs.find(v);
                    if (!reads && it != wire_regs.end() && it->second.count(reg)) {
                        reads = true;
                        via = v;
                    }
                    if (reads) break;
                }
                if (!reads) continue;
                RaceFinding f;
                f.kind = RaceKind::ReadWriteIntraCycle;
                f.variables = {reg};
                if (!via.empty()) f.variables.push_back(via);
                f.process_ids = {writer, q.id};
                f.message = "'" + reg + "' is blocking-assigned in process " + std::to_string(writer) +
                            " and read by process " + std::to_string(q.id) + (via.empty() ? "" : " through '" + via + "'");
                rep.findings.push_back(f);
            }
    return rep;
}

uint64_t trial_seed(uint64_t seed, size_t i) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void attach_writers(const Program& p, RaceFinding& f) {
    std::set<int> ids;
    for (const auto& proc : p.processes)
        for (const auto& s : assignments(proc.body))
            if (std::find(f.variables.begin(), f.variables.end(), s.lhs) != f.variables.end()) ids.insert(proc.id);
    f.process_ids.assign(ids.begin(), ids.end());
}

std::optional<RaceFinding> one_trial(const std::shared_ptr<const Machine>& m, uint64_t seed,
                                     const DynamicOptions& opt) {
    std::mt19937_64 rng(seed);
    DenseInputs in;
    in.num_sources = m->sources().size();
    in.table.resize(opt.n_cycles * in.num_sources);
    in.initial.assign(m->num_vars(), std::nullopt);
    auto draw = [&](size_t v) { return rng() & width_mask(std::min(opt.width, m->width(v))); };
    for (size_t c = 0; c < opt.n_cycles; ++c)
        for (size_t k = 0; k < in.num_sources; ++k) in.table[c * in.num_sources + k] = draw(m->sources()[k]);
    for (size_t v = 0; v < m->num_vars(); ++v)
        if (!m->is_wire(v)) in.initial[v] = draw(v);
    // Every lane issues at a different cycle, so liveness is compared for all t.
    std::vector<uint64_t> masks(opt.n_cycles);
    for (size_t c = 0; c < opt.n_cycles && c < 64; ++c) masks[c] = uint64_t(1) << c;
    RandomScheduler s1(rng()), s2(rng());
    Trace a, b;
    try {
        a = run_lanes(m, in, masks, opt.n_cycles, &s1);
        b = run_lanes(m, in, masks, opt.n_cycles, &s2);
    } catch (const GuardUnknown&) {
        return std::nullopt;
    }
    for (size_t i = 0; i < a.size(); ++i) {
        RaceFinding f;
        for (size_t v = 0; v < m->num_vars(); ++v)
            if (a[i].store[v] != b[i].store[v] || a[i].live[v] != b[i].live[v] ||
                a[i].influence[v] != b[i].influence[v])
                f.variables.push_back(m->name(v));
        if (f.variables.empty()) continue;
        f.kind = RaceKind::DynamicDivergence;
        f.replay_seed = seed;
        f.cycle = i;
        std::string names;
        for (const auto& v : f.variables) names += (names.empty() ? "" : ", ") + v;
        f.message = "two process orderings disagree on {" + names + "} at cycle " + std::to_string(i);
        return f;
    }
    return std::nullopt;
}

}  // namespace

RaceReport dynamic_differ(const Program& p, const AnnotationSet& annots, size_t trials, uint64_t seed,
                          const DynamicOptions& opt) {
    RaceReport rep;
    if (trials == 0) return rep;
    auto m = Machine::compile(p, annots);
    for (size_t i = 0; i < trials; ++i)
        if (auto f = one_trial(m, trial_seed(seed, i), opt)) {
            attach_writers(p, *f);
            rep.findings.push_back(*f);
            break;
        }
    return rep;
}

std::optional<RaceFinding> replay_trial(const Program& p, const AnnotationSet& annots, uint64_t seed,
                                        const DynamicOptions& opt) {
    auto f = one_trial(Machine::compile(p, annots), seed, opt);
    if (f) attach_writers(p, *f);
    return f;
}

}  // namespace ctlive
