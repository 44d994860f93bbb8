#include "ctlive/semantics.hpp"

#include <sstream>

#include "ctlive/error.hpp"

namespace ctlive {

static Value fit(const Value& v, unsigned width) { return v.known ? Value::of(v.bits, width) : Value::unknown(width); }

// ---------------------------------------------------------------------------
// Environment evaluation

static EvalResult eval_env(const Expr& e, const std::map<std::string, VarState>& env) {
    switch (e.kind()) {
        case Expr::Kind::Var: {
            auto it = env.find(e.name());
            if (it == env.end()) throw Error("no value for variable '" + e.name() + "'");
            return EvalResult{it->second.value, it->second.live, it->second.influence};
        }
        case Expr::Kind::Const: {
            unsigned w = e.const_width() ? e.const_width() : bit_length(e.value());
            return EvalResult{Value::of(e.value(), w), false, {}};
        }
        case Expr::Kind::App: {
            EvalResult r;
            std::vector<Value> vals;
            std::vector<unsigned> widths;
            for (const auto& a : e.args()) {
                EvalResult ar = eval_env(a, env);
                vals.push_back(ar.value);
                widths.push_back(ar.value.width);
                r.live = r.live || ar.live;
                r.influence |= ar.influence;
            }
            Op op = op_of_symbol(e.name());
            uint64_t hi = 0, lo = 0;
            if (op == Op::Slice && e.args().size() == 3) {
                hi = e.args()[1].value();
                lo = e.args()[2].value();
            }
            unsigned w = result_width(e.name(), widths, hi, lo);
            r.value = apply_op(op, vals.data(), vals.size(), w, lo);
            return r;
        }
    }
    return {};
}

EvalResult eval_expr(const Expr& e, const std::map<std::string, VarState>& env) { return eval_env(e, env); }

// ---------------------------------------------------------------------------
// InputSchedule

std::optional<uint64_t> InputSchedule::get(uint64_t cycle, const std::string& source) const {
    auto it = values.find({cycle, source});
    if (it == values.end()) return std::nullopt;
    return it->second;
}

nlohmann::json InputSchedule::to_json() const {
    nlohmann::json j;
    j["policy"] = policy == InputPolicy::HoldPrevious ? "hold" : "unknown";
    j["initial"] = nlohmann::json::object();
    for (const auto& [k, v] : initial) j["initial"][k] = v;
    j["inputs"] = nlohmann::json::object();
    for (const auto& [key, v] : values) j["inputs"][key.second][std::to_string(key.first)] = v;
    return j;
}

InputSchedule InputSchedule::from_json(const nlohmann::json& j) {
    InputSchedule s;
    if (j.contains("policy")) {
        std::string p = j.at("policy").get<std::string>();
        if (p == "hold")
            s.policy = InputPolicy::HoldPrevious;
        else if (p == "unknown")
            s.policy = InputPolicy::Unknown;
        else
            throw Error("unknown input policy '" + p + "'");
    }
    if (j.contains("initial"))
        for (const auto& [k, v] : j.at("initial").items()) s.initial[k] = v.get<uint64_t>();
    if (j.contains("inputs"))
        for (const auto& [src, cycles] : j.at("inputs").items())
            for (const auto& [c, v] : cycles.items()) s.values[{std::stoull(c), src}] = v.get<uint64_t>();
    return s;
}

// ---------------------------------------------------------------------------
// Machine

std::shared_ptr<const Machine> Machine::compile(const Program& program, const AnnotationSet& annots) {
    auto m = std::shared_ptr<Machine>(new Machine());
    for (const auto& [name, info] : program.vars) {
        m->index_[name] = m->names_.size();
        m->names_.push_back(name);
        m->widths_.push_back(info.width);
        m->wire_.push_back(info.is_wire());
        bool src = annots.sources.count(name) && info.is_register();
        m->source_.push_back(src);
        if (info.is_wire()) ++m->num_wires_;
    }
    for (size_t v = 0; v < m->names_.size(); ++v)
        if (m->source_[v]) m->sources_.push_back(v);
    for (const auto& s : annots.sinks)
        if (auto v = m->find(s)) m->sinks_.push_back(*v);
    m->readers_.resize(m->names_.size());
    for (const auto& p : program.processes) {
        Proc cp{p.id, p.kind, {}, {}};
        size_t pi = m->procs_.size();
        if (p.kind == ProcessKind::Continuous) {
            for (const Stmt* s : continuous_units(p)) {
                size_t u = m->units_.size();
                size_t e = m->compile_expr(s->expr);
                m->units_.push_back(Unit{pi, m->index(s->lhs), e});
                cp.units.push_back(u);
                for (size_t v : m->exprs_[e].free) m->readers_[v].push_back(u);
            }
        } else {
            cp.body = m->compile_body(p.body);
        }
        m->procs_.push_back(std::move(cp));
    }
    return m;
}

std::optional<size_t> Machine::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

size_t Machine::index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("undeclared variable '" + name + "'");
    return it->second;
}

int Machine::compile_node(const Expr& e) {
    Node n;
    switch (e.kind()) {
        case Expr::Kind::Var:
            n.var = static_cast<int>(index(e.name()));
            n.width = widths_[static_cast<size_t>(n.var)];
            break;
        case Expr::Kind::Const:
            n.is_const = true;
            n.width = e.const_width() ? e.const_width() : bit_length(e.value());
            n.constant = Value::of(e.value(), n.width);
            break;
        case Expr::Kind::App: {
            n.op = op_of_symbol(e.name());
            std::vector<unsigned> ws;
            for (const auto& a : e.args()) {
                int c = compile_node(a);
                n.args.push_back(c);
                ws.push_back(nodes_[static_cast<size_t>(c)].width);
            }
            uint64_t hi = 0;
            if (n.op == Op::Slice && e.args().size() == 3) {
                hi = e.args()[1].value();
                n.slice_lo = e.args()[2].value();
            }
            n.width = result_width(e.name(), ws, hi, n.slice_lo);
            break;
        }
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
}

size_t Machine::compile_expr(const Expr& e) {
    CompiledExpr ce;
    ce.root = compile_node(e);
    for (const auto& v : free_vars(e)) ce.free.push_back(index(v));
    exprs_.push_back(std::move(ce));
    return exprs_.size() - 1;
}

std::vector<Machine::CStmt> Machine::compile_body(const Stmt& s) {
    std::vector<CStmt> out;
    if (s.kind == Stmt::Kind::Skip) return out;
    if (s.kind == Stmt::Kind::Seq) {
        for (const auto& c : s.children) {
            auto part = compile_body(c);
            for (auto& p : part) out.push_back(std::move(p));
        }
        return out;
    }
    CStmt c;
    c.kind = s.kind;
    if (s.kind == Stmt::Kind::Assign) {
        c.assign_kind = s.assign_kind;
        c.lhs = index(s.lhs);
        c.expr = compile_expr(s.expr);
    } else {
        c.expr = compile_expr(s.expr);
        c.then_branch = compile_body(s.then_branch());
        c.else_branch = compile_body(s.else_branch());
    }
    out.push_back(std::move(c));
    return out;
}

Value Machine::eval_node(int idx, const std::vector<Value>& store) const {
    const Node& n = nodes_[static_cast<size_t>(idx)];
    if (n.var >= 0) return store[static_cast<size_t>(n.var)];
    if (n.is_const) return n.constant;
    Value local[8];
    std::vector<Value> heap;
    Value* args = local;
    if (n.args.size() > 8) {
        heap.resize(n.args.size());
        args = heap.data();
    }
    for (size_t i = 0; i < n.args.size(); ++i) args[i] = eval_node(n.args[i], store);
    return apply_op(n.op, args, n.args.size(), n.width, n.slice_lo);
}

Value Machine::eval_value(size_t expr, const std::vector<Value>& store) const {
    return eval_node(exprs_[expr].root, store);
}

// ---------------------------------------------------------------------------
// DenseInputs

DenseInputs DenseInputs::from(const Machine& m, const InputSchedule& s, size_t n_cycles) {
    DenseInputs d;
    d.num_sources = m.sources().size();
    d.table.assign(n_cycles * d.num_sources, std::nullopt);
    d.initial.assign(m.num_vars(), std::nullopt);
    d.policy = s.policy;
    std::map<size_t, size_t> pos;
    for (size_t k = 0; k < m.sources().size(); ++k) pos[m.sources()[k]] = k;
    for (const auto& [key, v] : s.values) {
        auto idx = m.find(key.second);
        if (!idx || !pos.count(*idx) || key.first >= n_cycles) continue;
        d.table[key.first * d.num_sources + pos[*idx]] = v;
    }
    for (const auto& [name, v] : s.initial)
        if (auto idx = m.find(name)) d.initial[*idx] = v;
    return d;
}

InputSchedule DenseInputs::to_schedule(const Machine& m) const {
    InputSchedule s;
    s.policy = policy;
    for (size_t i = 0; i < table.size(); ++i)
        if (table[i]) s.values[{i / num_sources, m.name(m.sources()[i % num_sources])}] = *table[i];
    for (size_t v = 0; v < initial.size(); ++v)
        if (initial[v]) s.initial[m.name(v)] = *initial[v];
    return s;
}

// ---------------------------------------------------------------------------
// Trace

Value Trace::value(size_t i, const std::string& var) const { return entries.at(i).store[machine->index(var)]; }

bool Trace::live(size_t i, const std::string& var, unsigned lane) const {
    return entries.at(i).is_live(machine->index(var), lane);
}

const CycleSet& Trace::influence(size_t i, const std::string& var) const {
    return entries.at(i).influence[machine->index(var)];
}

// ---------------------------------------------------------------------------
// Configuration

Configuration::Configuration(std::shared_ptr<const Machine> machine, const DenseInputs& inputs)
    : machine_(std::move(machine)) {
    const Machine& m = *machine_;
    size_t n = m.num_vars();
    store_.resize(n);
    for (size_t v = 0; v < n; ++v) {
        unsigned w = m.width(v);
        if (!m.is_wire(v) && v < inputs.initial.size() && inputs.initial[v])
            store_[v] = Value::of(*inputs.initial[v], w);
        else
            store_[v] = Value::unknown(w);
    }
    live_.assign(n, 0);
    infl_.assign(n, CycleSet());
    events_.assign(n, 0);
    pending_.assign(m.units().size(), 0);
    procs_.resize(m.num_processes());
    buffers_.resize(m.num_processes());
}

Configuration::Configuration(const Program& program, const AnnotationSet& annots, const InputSchedule& inputs)
    : Configuration(Machine::compile(program, annots), DenseInputs{}) {
    DenseInputs d = DenseInputs::from(*machine_, inputs, 0);
    for (size_t v = 0; v < store_.size(); ++v)
        if (!machine_->is_wire(v) && d.initial[v]) store_[v] = Value::of(*d.initial[v], machine_->width(v));
}

uint64_t Configuration::expr_live(size_t e) const {
    uint64_t l = 0;
    for (size_t v : machine_->expr(e).free) l |= live_[v];
    return l;
}

CycleSet Configuration::expr_influence(size_t e) const {
    CycleSet s;
    for (size_t v : machine_->expr(e).free) s |= infl_[v];
    return s;
}

void Configuration::write(size_t var, Value v, uint64_t live, CycleSet infl) {
    store_[var] = fit(v, machine_->width(var));
    live_[var] = live;
    infl_[var] = std::move(infl);
    events_[var] = 1;
    for (size_t r : machine_->readers(var)) pending_[r] = 1;
}

void Configuration::fire_unit(size_t u) {
    const auto& unit = machine_->units()[u];
    pending_[u] = 0;
    write(unit.lhs, machine_->eval_value(unit.expr, store_), expr_live(unit.expr), expr_influence(unit.expr));
}

bool Configuration::has_work(size_t p) {
    auto& ps = procs_[p];
    while (!ps.frames.empty() && ps.frames.back().pos >= ps.frames.back().list->size()) {
        if (ps.frames.back().guarded) ps.guards.pop_back();
        ps.frames.pop_back();
    }
    return !ps.frames.empty();
}

void Configuration::exec(size_t p) {
    auto& ps = procs_[p];
    Frame& f = ps.frames.back();
    const Machine::CStmt& s = (*f.list)[f.pos++];
    const Machine& m = *machine_;
    switch (s.kind) {
        case Stmt::Kind::Skip:
        case Stmt::Kind::Seq: return;
        case Stmt::Kind::Assign: {
            Value v = m.eval_value(s.expr, store_);
            uint64_t l = expr_live(s.expr);
            CycleSet infl = expr_influence(s.expr);
            if (!ps.guards.empty()) {
                l |= ps.guards.back().live;
                infl |= ps.guards.back().influence;
            }
            if (s.assign_kind == AssignKind::NonBlocking)
                buffers_[p].push_back(BufEntry{s.lhs, fit(v, m.width(s.lhs)), l, std::move(infl)});
            else
                write(s.lhs, v, l, std::move(infl));
            return;
        }
        case Stmt::Kind::If: {
            Value c = m.eval_value(s.expr, store_);
            if (!c.known)
                throw GuardUnknown("branch condition is unknown in process " + std::to_string(m.process_id(p)) +
                                   " at cycle " + std::to_string(cycle_));
            Guard g{expr_live(s.expr), expr_influence(s.expr)};
            if (!ps.guards.empty()) {
                g.live |= ps.guards.back().live;
                g.influence |= ps.guards.back().influence;
            }
            ps.guards.push_back(std::move(g));
            ps.frames.push_back(Frame{c.bits ? &s.then_branch : &s.else_branch, 0, true});
            return;
        }
    }
}

bool Configuration::try_step(Scheduler* scheduler) {
    const Machine& m = *machine_;
    // Continuous assignments first.
    size_t n_pending = 0;
    for (char p : pending_) n_pending += p != 0;
    if (n_pending) {
        size_t k = scheduler ? scheduler->pick(n_pending) : 0;
        for (size_t u = 0; u < pending_.size(); ++u) {
            if (!pending_[u]) continue;
            if (k-- == 0) {
                fire_unit(u);
                break;
            }
        }
        size_t bound = (m.num_wires() + 1) * std::max<size_t>(1, m.units().size());
        if (++cont_streak_ > bound) {
            std::string wires;
            for (size_t u = 0; u < pending_.size(); ++u)
                if (pending_[u]) wires += (wires.empty() ? "" : ", ") + m.name(m.units()[u].lhs);
            throw CombinationalLoop("continuous assignments do not settle: " + wires);
        }
        return true;
    }
    cont_streak_ = 0;
    // Then one statement of some process.
    if (scheduler) {
        std::vector<size_t> active;
        for (size_t p = 0; p < procs_.size(); ++p)
            if (has_work(p)) active.push_back(p);
        if (!active.empty()) {
            exec(active[scheduler->pick(active.size())]);
            return true;
        }
    } else {
        for (size_t p = 0; p < procs_.size(); ++p) {
            if (has_work(p)) {
                exec(p);
                return true;
            }
        }
    }
    // Finally, apply one buffered non-blocking assignment.
    std::vector<size_t> nonempty;
    for (size_t p = 0; p < buffers_.size(); ++p)
        if (!buffers_[p].empty()) nonempty.push_back(p);
    if (nonempty.empty()) return false;
    size_t p = nonempty[scheduler ? scheduler->pick(nonempty.size()) : 0];
    BufEntry e = std::move(buffers_[p].front());
    buffers_[p].pop_front();
    write(e.var, e.value, e.live, std::move(e.influence));
    return true;
}

void Configuration::settle(Scheduler* scheduler) {
    while (try_step(scheduler)) {
    }
}

TraceEntry Configuration::begin_cycle(uint64_t issue_mask, const DenseInputs& inputs) {
    const Machine& m = *machine_;
    if (started_)
        ++cycle_;
    else
        started_ = true;
    for (size_t v = 0; v < m.num_vars(); ++v) {
        if (m.is_wire(v)) {
            store_[v] = Value::unknown(m.width(v));
            live_[v] = 0;
            infl_[v].clear();
        } else if (m.is_source(v)) {
            live_[v] = issue_mask;
            infl_[v] = CycleSet::single(cycle_);
        } else {
            live_[v] &= ~issue_mask;
        }
    }
    for (size_t k = 0; k < m.sources().size(); ++k) {
        size_t v = m.sources()[k];
        size_t slot = cycle_ * inputs.num_sources + k;
        if (inputs.num_sources == m.sources().size() && slot < inputs.table.size() && inputs.table[slot])
            store_[v] = Value::of(*inputs.table[slot], m.width(v));
        else if (inputs.policy == InputPolicy::Unknown)
            store_[v] = Value::unknown(m.width(v));
    }
    std::fill(events_.begin(), events_.end(), 0);
    std::fill(pending_.begin(), pending_.end(), 1);
    for (auto& b : buffers_) b.clear();
    for (size_t p = 0; p < procs_.size(); ++p) {
        procs_[p].frames.clear();
        procs_[p].guards.clear();
        if (m.proc(p).kind == ProcessKind::Sequential) procs_[p].frames.push_back(Frame{&m.proc(p).body, 0, false});
    }
    cont_streak_ = 0;
    TraceEntry e = label();
    e.issue = issue_mask;
    return e;
}

TraceEntry Configuration::label() const {
    TraceEntry e;
    e.cycle = cycle_;
    e.store = store_;
    e.live = live_;
    e.influence = infl_;
    return e;
}

const Value& Configuration::value(const std::string& var) const { return store_[machine_->index(var)]; }

bool Configuration::live(const std::string& var, unsigned lane) const {
    return (live_[machine_->index(var)] >> lane) & 1;
}

const CycleSet& Configuration::influence(const std::string& var) const { return infl_[machine_->index(var)]; }

bool Configuration::in_events(const std::string& var) const { return events_[machine_->index(var)] != 0; }

size_t Configuration::proc_index(int id) const {
    for (size_t p = 0; p < machine_->num_processes(); ++p)
        if (machine_->process_id(p) == id) return p;
    throw Error("no process with id " + std::to_string(id));
}

size_t Configuration::buffer_size(int process_id) const { return buffers_[proc_index(process_id)].size(); }

bool Configuration::process_active(int process_id) const {
    const auto& ps = procs_[proc_index(process_id)];
    for (const auto& f : ps.frames)
        if (f.pos < f.list->size()) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Runs and trace comparisons

void micro_step(Configuration& c, Scheduler* scheduler) {
    if (!c.try_step(scheduler)) throw NoEnabledStep();
}

TraceEntry cycle_step(Configuration& c, bool issue, const InputSchedule& inputs) {
    uint64_t next = c.started() ? c.cycle() + 1 : 0;
    DenseInputs d = DenseInputs::from(c.machine(), inputs, next + 1);
    return c.begin_cycle(issue ? 1 : 0, d);
}

Trace run_lanes(std::shared_ptr<const Machine> machine, const DenseInputs& inputs,
                const std::vector<uint64_t>& issue_masks, size_t n_cycles, Scheduler* scheduler) {
    Trace t;
    t.machine = machine;
    t.entries.reserve(n_cycles);
    Configuration c(machine, inputs);
    for (size_t i = 0; i < n_cycles; ++i) {
        if (i) c.settle(scheduler);
        t.entries.push_back(c.begin_cycle(i < issue_masks.size() ? issue_masks[i] : 0, inputs));
    }
    return t;
}

Trace run(const Program& program, const AnnotationSet& annots, const InputSchedule& inputs,
          std::optional<uint64_t> t_issue, size_t n_cycles) {
    auto m = Machine::compile(program, annots);
    DenseInputs d = DenseInputs::from(*m, inputs, n_cycles);
    std::vector<uint64_t> masks(n_cycles, 0);
    if (t_issue && *t_issue < n_cycles) masks[*t_issue] = 1;
    return run_lanes(m, d, masks, n_cycles);
}

bool check_ct_pair(const Trace& left, const Trace& right, const std::set<std::string>& sinks) {
    if (left.size() != right.size())
        throw LengthMismatch("traces have different lengths (" + std::to_string(left.size()) + " vs " +
                             std::to_string(right.size()) + ")");
    for (const auto& s : sinks) {
        size_t vl = left.machine->index(s), vr = right.machine->index(s);
        for (size_t i = 0; i < left.size(); ++i)
            if (left[i].influence[vl] != right[i].influence[vr]) return false;
    }
    return true;
}

static std::vector<size_t> issue_cycles(const Trace& t) {
    std::vector<size_t> out;
    for (size_t i = 0; i < t.size(); ++i)
        if (t[i].issued()) out.push_back(i);
    return out;
}

bool check_liveq_pair(const Trace& left, const Trace& right, const std::set<std::string>& sinks) {
    if (left.size() != right.size())
        throw LengthMismatch("traces have different lengths (" + std::to_string(left.size()) + " vs " +
                             std::to_string(right.size()) + ")");
    auto il = issue_cycles(left), ir = issue_cycles(right);
    if (il.size() > 1 || ir.size() > 1) throw NotTTrace("trace issues more than once");
    if (il != ir) throw NotTTrace("traces issue at different cycles");
    for (const auto& s : sinks) {
        size_t vl = left.machine->index(s), vr = right.machine->index(s);
        for (size_t i = 0; i < left.size(); ++i)
            if (left[i].is_live(vl) != right[i].is_live(vr)) return false;
    }
    return true;
}

bool live_implies_influence(const Trace& trace, const std::vector<uint64_t>& lane_issue) {
    for (const auto& e : trace.entries)
        for (size_t v = 0; v < e.live.size(); ++v)
            for (unsigned lane = 0; lane < lane_issue.size(); ++lane)
                if (e.is_live(v, lane) && !e.influence[v].contains(lane_issue[lane])) return false;
    return true;
}

static std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string trace_csv(const Trace& trace, unsigned lane) {
    std::ostringstream os;
    const auto& names = trace.machine->names();
    os << "cycle,issue";
    for (const auto& n : names) os << "," << csv_quote(n) << "," << csv_quote("tau(" + n + ")") << ","
                                   << csv_quote("iota(" + n + ")");
    os << "\n";
    for (const auto& e : trace.entries) {
        os << e.cycle << "," << (e.issued(lane) ? 1 : 0);
        for (size_t v = 0; v < names.size(); ++v)
            os << "," << e.store[v].str() << "," << (e.is_live(v, lane) ? 1 : 0) << ","
               << csv_quote(e.influence[v].str());
        os << "\n";
    }
    return os.str();
}

nlohmann::json trace_json(const Trace& trace, unsigned lane) {
    nlohmann::json j;
    const auto& names = trace.machine->names();
    j["vars"] = names;
    j["rows"] = nlohmann::json::array();
    for (const auto& e : trace.entries) {
        nlohmann::json row;
        row["cycle"] = e.cycle;
        row["issue"] = e.issued(lane);
        for (size_t v = 0; v < names.size(); ++v) {
            row["value"][names[v]] = e.store[v].known ? nlohmann::json(e.store[v].bits) : nlohmann::json(nullptr);
            row["live"][names[v]] = e.is_live(v, lane);
            row["influence"][names[v]] = e.influence[v].elements();
        }
        j["rows"].push_back(std::move(row));
    }
    return j;
}

}  // namespace ctlive
