#include "ctlive/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "ctlive/error.hpp"
#include "ctlive/ir_text.hpp"

namespace ctlive {

void OracleConfig::validate() const {
    if (width < 1 || width > 3) throw DomainTooLarge("oracle width must be between 1 and 3");
    if (n_cycles > 10) throw DomainTooLarge("oracle horizon is limited to 10 cycles");
    for (auto t : issue_cycles)
        if (t >= n_cycles) throw DomainTooLarge("issue cycle " + std::to_string(t) + " is beyond the horizon");
}

std::string property_name(Property p) {
    return p == Property::ConstantTime ? "constant-time" : "liveness-equivalence";
}

nlohmann::json OracleVerdict::to_json() const {
    nlohmann::json j;
    j["property"] = property_name(property);
    j["holds"] = holds;
    if (witness) {
        const auto& w = *witness;
        j["witness"] = {{"left", w.left.to_json()},
                        {"right", w.right.to_json()},
                        {"t", w.t},
                        {"cycle", w.cycle},
                        {"sink", w.sink},
                        {"left_observation", w.left_observation},
                        {"right_observation", w.right_observation}};
    } else {
        j["witness"] = nullptr;
    }
    j["pairs_checked"] = pairs_checked;
    j["skipped_unknown_guards"] = skipped_unknown_guards;
    j["schedules"] = schedules;
    j["sampled"] = sampled;
    j["influence_violations"] = influence_violations;
    return j;
}

bool formula_holds(const Formula& f, const Machine& m, const std::vector<Value>& left,
                   const std::vector<Value>& right) {
    auto on = [&](Side s, auto&& pred) {
        return (s == Side::R || pred(left)) && (s == Side::L || pred(right));
    };
    for (const auto& a : f.atoms) {
        size_t x = m.index(a.x);
        bool ok = true;
        switch (a.kind) {
            case Atom::Kind::EqLR:
                ok = left[x] == right[x];
                break;
            case Atom::Kind::EqConst:
                ok = on(a.side, [&](const std::vector<Value>& s) {
                    return s[x].known && s[x].bits == (a.value & width_mask(s[x].width));
                });
                break;
            case Atom::Kind::EqVars: {
                size_t y = m.index(a.y);
                ok = on(a.side, [&](const std::vector<Value>& s) {
                    return s[x].known == s[y].known && (!s[x].known || s[x].bits == s[y].bits);
                });
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

namespace {

// One enumerated dimension: a source value at a cycle or an initial value.
struct Dim {
    bool source;
    size_t slot;  // table slot or variable index
    unsigned bits;
};

struct Domain {
    std::shared_ptr<const Machine> machine;
    std::vector<Dim> dims;
    std::vector<DenseInputs> schedules;
    bool sampled = false;
};

std::set<std::string> relevant_registers(const Program& p, const AnnotationSet& annots) {
    std::set<std::string> out;
    for (const auto& proc : p.processes)
        for (const auto& v : read_vars(proc.body)) out.insert(v);
    for (const auto* list : {&annots.initial_eq, &annots.always_eq})
        for (const auto& f : *list)
            for (const auto& v : f.vars()) out.insert(v);
    return out;
}

Domain build_domain(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg) {
    cfg.validate();
    Domain d;
    d.machine = Machine::compile(p, annots);
    const Machine& m = *d.machine;
    size_t ns = m.sources().size();
    for (size_t c = 0; c < cfg.n_cycles; ++c)
        for (size_t k = 0; k < ns; ++k)
            d.dims.push_back({true, c * ns + k, std::min(cfg.width, m.width(m.sources()[k]))});
    auto relevant = relevant_registers(p, annots);
    for (size_t v = 0; v < m.num_vars(); ++v)
        if (!m.is_wire(v) && !m.is_source(v) && relevant.count(m.name(v)))
            d.dims.push_back({false, v, std::min(cfg.width, m.width(v))});

    DenseInputs base;
    base.num_sources = ns;
    base.table.assign(cfg.n_cycles * ns, uint64_t(0));
    base.initial.assign(m.num_vars(), std::nullopt);
    for (size_t v = 0; v < m.num_vars(); ++v)
        if (!m.is_wire(v) && !m.is_source(v)) base.initial[v] = 0;

    unsigned total_bits = 0;
    for (const auto& dim : d.dims) total_bits += dim.bits;
    auto fill = [&](auto&& next_bits) {
        DenseInputs s = base;
        for (const auto& dim : d.dims) {
            uint64_t v = next_bits(dim.bits);
            if (dim.source)
                s.table[dim.slot] = v;
            else
                s.initial[dim.slot] = v;
        }
        return s;
    };
    if (total_bits < 63 && (uint64_t(1) << total_bits) <= cfg.max_schedules) {
        uint64_t count = uint64_t(1) << total_bits;
        d.schedules.reserve(count);
        // The first dimension varies slowest, so index order matches
        // lexicographic order of (cycle, source) values.
        for (uint64_t idx = 0; idx < count; ++idx) {
            unsigned shift = total_bits;
            d.schedules.push_back(fill([&](unsigned bits) {
                shift -= bits;
                return (idx >> shift) & width_mask(bits);
            }));
        }
    } else if (cfg.sample) {
        d.sampled = true;
        std::mt19937_64 rng(cfg.seed);
        d.schedules.reserve(cfg.max_schedules);
        for (uint64_t i = 0; i < cfg.max_schedules; ++i)
            d.schedules.push_back(fill([&](unsigned bits) { return rng() & width_mask(bits); }));
    } else {
        throw DomainTooLarge("input domain has 2^" + std::to_string(total_bits) + " schedules, above the cap of " +
                             std::to_string(cfg.max_schedules));
    }
    return d;
}

std::vector<uint64_t> lanes_of(const OracleConfig& cfg) {
    std::vector<uint64_t> ts = cfg.issue_cycles;
    if (ts.empty())
        for (uint64_t t = 0; t < cfg.n_cycles; ++t) ts.push_back(t);
    return ts;
}

struct RunSummary {
    bool skipped = false;
    bool left_ok = false;
    bool right_ok = false;
    std::vector<uint64_t> key;
    std::vector<CycleSet> ct;             // [cycle * sinks + s]
    std::vector<std::vector<char>> live;  // [lane][cycle * sinks + s]
    uint64_t influence_violations = 0;
};

// Splits assumptions into per-side unary filters and the cross-run
// equalities that define buckets.
struct Assumptions {
    std::vector<Formula> unary_init_l, unary_init_r, unary_always_l, unary_always_r;
    std::vector<size_t> key_init, key_always;

    Assumptions(const Machine& m, const AnnotationSet& a) {
        auto split = [&](const std::vector<Formula>& fs, std::vector<Formula>& l, std::vector<Formula>& r,
                         std::vector<size_t>& key) {
            Formula fl, fr;
            for (const auto& f : fs)
                for (const auto& atom : f.atoms) {
                    if (atom.kind == Atom::Kind::EqLR) {
                        key.push_back(m.index(atom.x));
                        continue;
                    }
                    if (atom.side != Side::R) fl.atoms.push_back(atom);
                    if (atom.side != Side::L) fr.atoms.push_back(atom);
                }
            l.push_back(fl);
            r.push_back(fr);
        };
        split(a.initial_eq, unary_init_l, unary_init_r, key_init);
        split(a.always_eq, unary_always_l, unary_always_r, key_always);
    }
};

void push_value(std::vector<uint64_t>& key, const Value& v) {
    key.push_back(v.known ? v.bits : ~uint64_t(0));
    key.push_back(v.known);
}

uint64_t count_influence_gaps(const Trace& trace, const std::vector<uint64_t>& lane_issue) {
    uint64_t bad = 0;
    for (const auto& e : trace.entries)
        for (size_t v = 0; v < e.live.size(); ++v)
            for (unsigned lane = 0; lane < lane_issue.size(); ++lane)
                if (e.is_live(v, lane) && !e.influence[v].contains(lane_issue[lane])) ++bad;
    return bad;
}

RunSummary summarize(const Machine& m, const std::shared_ptr<const Machine>& mp, const DenseInputs& in,
                     const std::vector<uint64_t>& masks, const std::vector<uint64_t>& lane_issue, unsigned n,
                     const Assumptions& as) {
    RunSummary r;
    Trace tr;
    try {
        tr = run_lanes(mp, in, masks, n);
    } catch (const GuardUnknown&) {
        r.skipped = true;
        return r;
    }
    r.influence_violations = count_influence_gaps(tr, lane_issue);
    r.left_ok = r.right_ok = true;
    for (size_t i = 0; i < tr.size(); ++i) {
        const auto& st = tr[i].store;
        auto check = [&](const std::vector<Formula>& fs) {
            for (const auto& f : fs)
                if (!formula_holds(f, m, st, st)) return false;
            return true;
        };
        if (i == 0) {
            r.left_ok = r.left_ok && check(as.unary_init_l);
            r.right_ok = r.right_ok && check(as.unary_init_r);
            for (auto v : as.key_init) push_value(r.key, st[v]);
        }
        r.left_ok = r.left_ok && check(as.unary_always_l);
        r.right_ok = r.right_ok && check(as.unary_always_r);
        for (auto v : as.key_always) push_value(r.key, st[v]);
    }
    const auto& sinks = m.sinks();
    r.ct.reserve(n * sinks.size());
    r.live.assign(lane_issue.size(), std::vector<char>(n * sinks.size()));
    for (size_t i = 0; i < tr.size(); ++i)
        for (size_t s = 0; s < sinks.size(); ++s) {
            r.ct.push_back(tr[i].influence[sinks[s]]);
            for (size_t lane = 0; lane < lane_issue.size(); ++lane)
                r.live[lane][i * sinks.size() + s] = tr[i].is_live(sinks[s], lane);
        }
    return r;
}

struct Analysis {
    Domain domain;
    std::vector<uint64_t> lanes;
    std::vector<RunSummary> runs;
    uint64_t skipped = 0;
    uint64_t influence_gaps = 0;
};

Analysis analyze(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg) {
    Analysis a;
    a.domain = build_domain(p, annots, cfg);
    a.lanes = lanes_of(cfg);
    if (a.lanes.size() > 64) throw DomainTooLarge("at most 64 issue cycles per run");
    const Machine& m = *a.domain.machine;
    Assumptions as(m, annots);
    std::vector<uint64_t> masks(cfg.n_cycles, 0);
    for (size_t j = 0; j < a.lanes.size(); ++j) masks[a.lanes[j]] |= uint64_t(1) << j;

    size_t n = a.domain.schedules.size();
    a.runs.resize(n);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i; (i = next.fetch_add(1)) < n;)
            a.runs[i] = summarize(m, a.domain.machine, a.domain.schedules[i], masks, a.lanes, cfg.n_cycles, as);
    };
    unsigned threads = std::max(1u, cfg.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& r : a.runs) {
        a.skipped += r.skipped;
        a.influence_gaps += r.influence_violations;
    }
    return a;
}

struct Candidate {
    uint64_t cycle, t;
    size_t a, b, sink;
    bool operator<(const Candidate& o) const {
        return std::tie(cycle, t, a, b, sink) < std::tie(o.cycle, o.t, o.a, o.b, o.sink);
    }
};

// Observation accessor: returns a comparable handle for run i.
template <class Obs>
OracleVerdict judge(const Analysis& an, Property prop, size_t n_sinks, uint64_t lane_t, Obs&& obs,
                    std::optional<Candidate>& best) {
    OracleVerdict v;
    v.property = prop;
    std::map<std::vector<uint64_t>, std::pair<std::vector<size_t>, std::vector<size_t>>> buckets;
    for (size_t i = 0; i < an.runs.size(); ++i) {
        const auto& r = an.runs[i];
        if (r.skipped) continue;
        if (!r.left_ok && !r.right_ok) continue;
        auto& b = buckets[r.key];
        if (r.left_ok) b.first.push_back(i);
        if (r.right_ok) b.second.push_back(i);
    }
    for (const auto& [key, sides] : buckets) {
        const auto& [as, bs] = sides;
        v.pairs_checked += uint64_t(as.size()) * bs.size();
        if (as.empty() || bs.empty()) continue;
        // Representatives of each distinct observation, first in order.
        auto classes = [&](const std::vector<size_t>& idx) {
            std::vector<size_t> reps;
            for (size_t i : idx) {
                bool seen = false;
                for (size_t r : reps)
                    if (obs(r) == obs(i)) {
                        seen = true;
                        break;
                    }
                if (!seen) reps.push_back(i);
            }
            return reps;
        };
        auto ra = classes(as), rb = classes(bs);
        for (size_t ia : ra)
            for (size_t ib : rb) {
                const auto& oa = obs(ia);
                const auto& ob = obs(ib);
                if (oa == ob) continue;
                for (size_t k = 0; k < oa.size(); ++k)
                    if (oa[k] != ob[k]) {
                        Candidate c{k / n_sinks, lane_t, ia, ib, k % n_sinks};
                        if (!best || c < *best) best = c;
                        break;
                    }
            }
    }
    return v;
}

OracleWitness make_witness(const Analysis& an, const Candidate& c, Property prop, size_t lane) {
    const Machine& m = *an.domain.machine;
    OracleWitness w;
    w.left = an.domain.schedules[c.a].to_schedule(m);
    w.right = an.domain.schedules[c.b].to_schedule(m);
    w.cycle = c.cycle;
    w.sink = m.name(m.sinks()[c.sink]);
    size_t k = c.cycle * m.sinks().size() + c.sink;
    if (prop == Property::ConstantTime) {
        const auto& l = an.runs[c.a].ct[k];
        const auto& r = an.runs[c.b].ct[k];
        w.left_observation = l.str();
        w.right_observation = r.str();
        // Smallest cycle in exactly one of the two sets.
        w.t = UINT64_MAX;
        for (auto e : l.elements())
            if (!r.contains(e)) w.t = std::min(w.t, e);
        for (auto e : r.elements())
            if (!l.contains(e)) w.t = std::min(w.t, e);
    } else {
        w.t = c.t;
        w.left_observation = an.runs[c.a].live[lane][k] ? "true" : "false";
        w.right_observation = an.runs[c.b].live[lane][k] ? "true" : "false";
    }
    return w;
}

void finish(OracleVerdict& v, const Analysis& an) {
    v.skipped_unknown_guards = an.skipped;
    v.schedules = an.domain.schedules.size();
    v.sampled = an.domain.sampled;
    v.influence_violations = an.influence_gaps;
}

OracleVerdict verdict_ct(const Analysis& an) {
    size_t ns = an.domain.machine->sinks().size();
    std::optional<Candidate> best;
    OracleVerdict v = judge(an, Property::ConstantTime, std::max<size_t>(ns, 1), 0,
                            [&](size_t i) -> const std::vector<CycleSet>& { return an.runs[i].ct; }, best);
    if (best) {
        v.holds = false;
        v.witness = make_witness(an, *best, Property::ConstantTime, 0);
    }
    finish(v, an);
    return v;
}

OracleVerdict verdict_liveq(const Analysis& an) {
    size_t ns = an.domain.machine->sinks().size();
    OracleVerdict total;
    total.property = Property::LivenessEquivalent;
    std::optional<Candidate> best;
    size_t best_lane = 0;
    for (size_t lane = 0; lane < an.lanes.size(); ++lane) {
        std::optional<Candidate> here;
        auto v = judge(an, Property::LivenessEquivalent, std::max<size_t>(ns, 1), an.lanes[lane],
                       [&](size_t i) -> const std::vector<char>& { return an.runs[i].live[lane]; }, here);
        total.pairs_checked += v.pairs_checked;
        if (here && (!best || *here < *best)) {
            best = here;
            best_lane = lane;
        }
    }
    if (best) {
        total.holds = false;
        total.witness = make_witness(an, *best, Property::LivenessEquivalent, best_lane);
    }
    finish(total, an);
    return total;
}

}  // namespace

std::vector<InputSchedule> enumerate_schedules(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg) {
    Domain d = build_domain(p, annots, cfg);
    std::vector<InputSchedule> out;
    out.reserve(d.schedules.size());
    for (const auto& s : d.schedules) out.push_back(s.to_schedule(*d.machine));
    return out;
}

uint64_t enumerate_pairs(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg,
                         const std::function<bool(const InputSchedule&, const InputSchedule&)>& yield) {
    Domain d = build_domain(p, annots, cfg);
    const Machine& m = *d.machine;
    std::vector<size_t> ok;
    std::vector<Trace> traces(d.schedules.size());
    std::vector<uint64_t> none(cfg.n_cycles, 0);
    for (size_t i = 0; i < d.schedules.size(); ++i) {
        try {
            traces[i] = run_lanes(d.machine, d.schedules[i], none, cfg.n_cycles);
            ok.push_back(i);
        } catch (const GuardUnknown&) {
        }
    }
    uint64_t count = 0;
    for (size_t i : ok)
        for (size_t j : ok) {
            const Trace &a = traces[i], &b = traces[j];
            bool sat = true;
            for (size_t c = 0; c < a.size() && sat; ++c) {
                if (c == 0)
                    for (const auto& f : annots.initial_eq) sat = sat && formula_holds(f, m, a[0].store, b[0].store);
                for (const auto& f : annots.always_eq) sat = sat && formula_holds(f, m, a[c].store, b[c].store);
            }
            if (!sat) continue;
            ++count;
            if (!yield(d.schedules[i].to_schedule(m), d.schedules[j].to_schedule(m))) return count;
        }
    return count;
}

OracleVerdict brute_force_ct(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg) {
    return verdict_ct(analyze(p, annots, cfg));
}

OracleVerdict brute_force_liveq(const Program& p, const AnnotationSet& annots, const OracleConfig& cfg) {
    return verdict_liveq(analyze(p, annots, cfg));
}

std::pair<OracleVerdict, OracleVerdict> brute_force_both(const Program& p, const AnnotationSet& annots,
                                                         const OracleConfig& cfg) {
    Analysis an = analyze(p, annots, cfg);
    return {verdict_ct(an), verdict_liveq(an)};
}

// ---------------------------------------------------------------------------
// Random programs

namespace {

class Gen {
public:
    explicit Gen(uint64_t seed) : rng_(seed) {}

    size_t pick(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }
    size_t range(size_t lo, size_t hi) { return std::uniform_int_distribution<size_t>(lo, hi)(rng_); }
    bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

    Expr expr(const std::vector<std::string>& vars, int depth) {
        if (depth == 0 || coin(0.35)) {
            if (vars.empty() || coin(0.12)) return Expr::constant(pick(2), 1);
            return Expr::var(vars[pick(vars.size())]);
        }
        static const char* binary[] = {"&", "|", "^", "==", "!=", "&&", "||", "*", "+"};
        double r = std::uniform_real_distribution<double>(0, 1)(rng_);
        if (r < 0.15) return Expr::app(coin(0.5) ? "!" : "~", {expr(vars, depth - 1)});
        if (r < 0.25) return Expr::app("?:", {expr(vars, depth - 1), expr(vars, depth - 1), expr(vars, depth - 1)});
        return Expr::app(binary[pick(std::size(binary))], {expr(vars, depth - 1), expr(vars, depth - 1)});
    }

private:
    std::mt19937_64 rng_;
};

Stmt with_kinds(const Stmt& s, const std::set<std::string>& blocking) {
    Stmt out = s;
    if (s.is_assign() && s.assign_kind != AssignKind::Continuous)
        out.assign_kind = blocking.count(s.lhs) ? AssignKind::Blocking : AssignKind::NonBlocking;
    for (auto& c : out.children) c = with_kinds(c, blocking);
    return out;
}

}  // namespace

RandomProgram random_program(uint64_t seed) {
    Gen g(seed);
    RandomProgram rp;
    rp.seed = seed;
    Program& p = rp.program;
    AnnotationSet& a = rp.annots;

    size_t n_reg = g.range(2, 4);
    size_t n_src = g.range(1, std::min<size_t>(2, n_reg - 1));
    size_t n_seq = g.range(1, 2);
    size_t n_wire = g.range(0, std::min<size_t>(2, 3 - n_seq));
    std::vector<std::string> regs, wires;
    for (size_t i = 0; i < n_reg; ++i) {
        regs.push_back("r" + std::to_string(i));
        p.declare(regs.back(), StorageClass::Register, 1);
    }
    for (size_t i = 0; i < n_wire; ++i) {
        wires.push_back("w" + std::to_string(i));
        p.declare(wires.back(), StorageClass::Wire, 1);
    }
    for (size_t i = 0; i < n_src; ++i) a.sources.insert(regs[i]);

    // Owner process of each non-source register; unowned registers keep
    // their initial value forever.
    std::map<std::string, size_t> owner;
    for (size_t i = n_src; i < n_reg; ++i)
        if (g.coin(0.8)) owner[regs[i]] = g.pick(n_seq);
    if (owner.empty()) owner[regs.back()] = 0;
    std::vector<std::vector<std::string>> owned(n_seq);
    for (const auto& [r, q] : owner) owned[q].push_back(r);
    owned.erase(std::remove_if(owned.begin(), owned.end(), [](const auto& v) { return v.empty(); }), owned.end());

    std::vector<std::string> readable = regs;
    int next_id = 0;
    for (size_t i = 0; i < n_wire; ++i) {
        std::vector<std::string> deps = regs;
        for (size_t j = 0; j < i; ++j) deps.push_back(wires[j]);
        p.processes.push_back({next_id++, ProcessKind::Continuous, Stmt::continuous(wires[i], g.expr(deps, 2))});
    }
    readable.insert(readable.end(), wires.begin(), wires.end());

    size_t first_seq = p.processes.size();
    for (const auto& regs_here : owned) {
        std::vector<Stmt> top, then_s, else_s, inner_then, inner_else;
        bool use_if = g.coin(0.6), nested = use_if && g.coin(0.3);
        for (const auto& r : regs_here) {
            auto assign = [&] { return Stmt::nonblocking(r, g.expr(readable, 2)); };
            if (!use_if || g.coin(0.35)) {
                top.push_back(assign());
                continue;
            }
            size_t where = g.pick(3);
            if (nested && g.coin(0.4)) {
                if (where != 1) inner_then.push_back(assign());
                if (where != 0) inner_else.push_back(assign());
                continue;
            }
            if (where != 1) then_s.push_back(assign());
            if (where != 0) else_s.push_back(assign());
        }
        if (nested && (!inner_then.empty() || !inner_else.empty()))
            then_s.push_back(Stmt::ite(g.expr(readable, 1), Stmt::seq(inner_then), Stmt::seq(inner_else)));
        if (!then_s.empty() || !else_s.empty()) {
            auto ite = Stmt::ite(g.expr(readable, 1), Stmt::seq(then_s), Stmt::seq(else_s));
            top.insert(top.begin() + g.pick(top.size() + 1), ite);
        }
        p.processes.push_back({next_id++, ProcessKind::Sequential, Stmt::seq(top)});
    }

    // Blocking assignment only for registers no other process reads.
    std::set<std::string> blocking;
    for (const auto& [r, q] : owner) {
        size_t proc = first_seq;
        for (size_t k = first_seq; k < p.processes.size(); ++k)
            for (const auto& s : assignments(p.processes[k].body))
                if (s.lhs == r) proc = k;
        bool read_elsewhere = false;
        for (size_t k = 0; k < p.processes.size(); ++k)
            if (k != proc && read_vars(p.processes[k].body).count(r)) read_elsewhere = true;
        if (!read_elsewhere && g.coin(0.3)) blocking.insert(r);
    }
    for (size_t k = first_seq; k < p.processes.size(); ++k)
        p.processes[k].body = with_kinds(p.processes[k].body, blocking);

    std::vector<std::string> assigned;
    for (const auto& [r, q] : owner) assigned.push_back(r);
    a.sinks.insert(assigned[g.pick(assigned.size())]);
    if (assigned.size() > 1 && g.coin(0.4)) a.sinks.insert(assigned[g.pick(assigned.size())]);

    for (size_t i = 0; i < n_reg; ++i) {
        const auto& r = regs[i];
        Formula f;
        if (a.sources.count(r)) {
            if (g.coin(0.25)) f.atoms.push_back(Atom::eq_lr(r));
        } else if (!owner.count(r)) {
            if (g.coin(0.5))
                f.atoms.push_back(Atom::eq_const(Side::Both, r, g.pick(2)));
            else if (g.coin(0.4))
                f.atoms.push_back(Atom::eq_lr(r));
            else if (g.coin(0.2))
                f.atoms.push_back(Atom::eq_const(g.coin(0.5) ? Side::L : Side::R, r, 1));
        } else if (g.coin(0.3)) {
            Formula init;
            init.atoms.push_back(Atom::eq_lr(r));
            a.initial_eq.push_back(init);
        }
        if (!f.atoms.empty()) a.always_eq.push_back(f);
    }
    if (n_src == 2 && g.coin(0.1)) {
        Formula f;
        f.atoms.push_back(Atom::eq_vars(Side::Both, regs[0], regs[1]));
        a.always_eq.push_back(f);
    }
    return rp;
}

uint64_t crosscheck_case_seed(uint64_t seed, size_t i) {
    // splitmix64 of (seed, i)
    uint64_t z = seed * 0x9e3779b97f4a7c15ULL + (i + 1) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

nlohmann::json CrosscheckReport::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["count"] = cases.size();
    j["disagreements"] = disagreements;
    j["influence_violations"] = influence_violations;
    auto arr = nlohmann::json::array();
    for (const auto& c : cases)
        arr.push_back({{"seed", c.seed},
                       {"constant_time", c.ct},
                       {"liveness_equivalent", c.liveq},
                       {"pairs_checked", c.pairs_checked},
                       {"skipped_unknown_guards", c.skipped_unknown_guards}});
    j["cases"] = arr;
    return j;
}

CrosscheckReport property_crosscheck(uint64_t seed, size_t count, const OracleConfig& cfg) {
    CrosscheckReport rep;
    rep.seed = seed;
    for (size_t i = 0; i < count; ++i) {
        auto rp = random_program(crosscheck_case_seed(seed, i));
        auto [ct, lq] = brute_force_both(rp.program, rp.annots, cfg);
        CrosscheckCase c;
        c.seed = rp.seed;
        c.program = print_program(rp.program, rp.annots);
        c.ct = ct.holds;
        c.liveq = lq.holds;
        c.pairs_checked = ct.pairs_checked;
        c.skipped_unknown_guards = ct.skipped_unknown_guards;
        rep.influence_violations += ct.influence_violations;
        if (c.ct != c.liveq) rep.disagreements.push_back(i);
        rep.cases.push_back(std::move(c));
    }
    return rep;
}

}  // namespace ctlive
