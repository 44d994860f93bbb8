#pragma once

// Cycle-accurate interpreter with liveness and influence tracking.
//
// Liveness is tracked per lane: bit j of a liveness mask is the variable's
// liveness bit in the j-th of several t-traces that share one input
// schedule but differ in their issue cycle. Values and influence sets do not
// depend on the issue cycle, so one run answers every t at once. The plain
// single-trace API uses lane 0.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "ctlive/ir.hpp"
#include "ctlive/value.hpp"

namespace ctlive {

struct EvalResult {
    Value value;
    bool live = false;
    CycleSet influence;
};

struct VarState {
    Value value;
    bool live = false;
    CycleSet influence;
};

/// Evaluates an expression against an explicit environment.
EvalResult eval_expr(const Expr& e, const std::map<std::string, VarState>& env);

enum class InputPolicy { HoldPrevious, Unknown };

struct InputSchedule {
    /// (cycle, source) -> value loaded at the start of that cycle.
    std::map<std::pair<uint64_t, std::string>, uint64_t> values;
    /// Initial register contents; registers not listed start unknown.
    std::map<std::string, uint64_t> initial;
    InputPolicy policy = InputPolicy::HoldPrevious;

    void set(uint64_t cycle, const std::string& source, uint64_t v) { values[{cycle, source}] = v; }
    std::optional<uint64_t> get(uint64_t cycle, const std::string& source) const;

    nlohmann::json to_json() const;
    static InputSchedule from_json(const nlohmann::json& j);
    friend bool operator==(const InputSchedule&, const InputSchedule&) = default;
};

/// Program compiled to index form for fast interpretation.
class Machine {
public:
    static std::shared_ptr<const Machine> compile(const Program& program, const AnnotationSet& annots);

    size_t num_vars() const { return names_.size(); }
    const std::string& name(size_t v) const { return names_[v]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<size_t> find(const std::string& name) const;
    size_t index(const std::string& name) const;
    unsigned width(size_t v) const { return widths_[v]; }
    bool is_wire(size_t v) const { return wire_[v]; }
    bool is_source(size_t v) const { return source_[v]; }
    const std::vector<size_t>& sources() const { return sources_; }
    const std::vector<size_t>& sinks() const { return sinks_; }
    size_t num_processes() const { return procs_.size(); }
    int process_id(size_t p) const { return procs_[p].id; }
    size_t num_wires() const { return num_wires_; }

    struct Node {
        Op op = Op::Uninterpreted;
        int var = -1;
        bool is_const = false;
        Value constant;
        unsigned width = 1;
        uint64_t slice_lo = 0;
        std::vector<int> args;
    };
    struct CompiledExpr {
        int root = -1;
        std::vector<size_t> free;
    };
    struct CStmt {
        Stmt::Kind kind = Stmt::Kind::Skip;
        AssignKind assign_kind = AssignKind::Blocking;
        size_t lhs = 0;
        size_t expr = 0;
        std::vector<CStmt> then_branch;
        std::vector<CStmt> else_branch;
    };
    struct Unit {
        size_t proc;
        size_t lhs;
        size_t expr;
    };
    struct Proc {
        int id;
        ProcessKind kind;
        std::vector<CStmt> body;
        std::vector<size_t> units;
    };

    Value eval_value(size_t expr, const std::vector<Value>& store) const;
    const CompiledExpr& expr(size_t e) const { return exprs_[e]; }
    const Proc& proc(size_t p) const { return procs_[p]; }
    const std::vector<Unit>& units() const { return units_; }
    const std::vector<size_t>& readers(size_t v) const { return readers_[v]; }

private:
    int compile_node(const Expr& e);
    size_t compile_expr(const Expr& e);
    std::vector<CStmt> compile_body(const Stmt& s);
    Value eval_node(int n, const std::vector<Value>& store) const;

    std::vector<std::string> names_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<unsigned> widths_;
    std::vector<bool> wire_;
    std::vector<bool> source_;
    std::vector<size_t> sources_;
    std::vector<size_t> sinks_;
    size_t num_wires_ = 0;
    std::vector<Node> nodes_;
    std::vector<CompiledExpr> exprs_;
    std::vector<Proc> procs_;
    std::vector<Unit> units_;
    std::vector<std::vector<size_t>> readers_;
};

/// Input schedule resolved against a machine: per cycle, per source.
struct DenseInputs {
    size_t num_sources = 0;
    /// cycle * num_sources + source position; nullopt applies the policy.
    std::vector<std::optional<uint64_t>> table;
    /// Initial value per variable index.
    std::vector<std::optional<uint64_t>> initial;
    InputPolicy policy = InputPolicy::HoldPrevious;

    static DenseInputs from(const Machine& m, const InputSchedule& s, size_t n_cycles);
    InputSchedule to_schedule(const Machine& m) const;
};

struct TraceEntry {
    uint64_t cycle = 0;
    /// Lanes whose issue cycle is this one.
    uint64_t issue = 0;
    std::vector<Value> store;
    std::vector<uint64_t> live;
    std::vector<CycleSet> influence;

    bool is_live(size_t v, unsigned lane = 0) const { return (live[v] >> lane) & 1; }
    bool issued(unsigned lane = 0) const { return (issue >> lane) & 1; }
};

struct Trace {
    std::shared_ptr<const Machine> machine;
    std::vector<TraceEntry> entries;

    size_t size() const { return entries.size(); }
    const TraceEntry& operator[](size_t i) const { return entries[i]; }
    Value value(size_t i, const std::string& var) const;
    bool live(size_t i, const std::string& var, unsigned lane = 0) const;
    const CycleSet& influence(size_t i, const std::string& var) const;
};

/// Picks among same-priority steps. The interpreter's default is the
/// lowest process id; a scheduler replaces that choice.
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual size_t pick(size_t n_choices) = 0;
};

class RandomScheduler : public Scheduler {
public:
    explicit RandomScheduler(uint64_t seed) : rng_(seed) {}
    size_t pick(size_t n) override { return n <= 1 ? 0 : std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }

private:
    std::mt19937_64 rng_;
};

class Configuration {
public:
    Configuration(std::shared_ptr<const Machine> machine, const DenseInputs& inputs);
    Configuration(const Program& program, const AnnotationSet& annots, const InputSchedule& inputs);

    const Machine& machine() const { return *machine_; }
    std::shared_ptr<const Machine> machine_ptr() const { return machine_; }

    /// Applies one enabled step. Returns false when none is enabled.
    bool try_step(Scheduler* scheduler = nullptr);
    /// Runs steps until the cycle is quiescent.
    void settle(Scheduler* scheduler = nullptr);
    /// Starts the next cycle and returns its label. The first call starts cycle 0.
    TraceEntry begin_cycle(uint64_t issue_mask, const DenseInputs& inputs);

    bool started() const { return started_; }
    uint64_t cycle() const { return cycle_; }
    const Value& value(const std::string& var) const;
    bool live(const std::string& var, unsigned lane = 0) const;
    const CycleSet& influence(const std::string& var) const;
    bool in_events(const std::string& var) const;
    size_t buffer_size(int process_id) const;
    /// True when the process still has statements left in this cycle.
    bool process_active(int process_id) const;
    TraceEntry label() const;

private:
    struct Frame {
        const std::vector<Machine::CStmt>* list;
        size_t pos;
        bool guarded;
    };
    struct Guard {
        uint64_t live;
        CycleSet influence;
    };
    struct ProcState {
        std::vector<Frame> frames;
        std::vector<Guard> guards;
    };
    struct BufEntry {
        size_t var;
        Value value;
        uint64_t live;
        CycleSet influence;
    };

    void write(size_t var, Value v, uint64_t live, CycleSet infl);
    bool has_work(size_t p);
    void exec(size_t p);
    void fire_unit(size_t u);
    size_t proc_index(int id) const;
    uint64_t expr_live(size_t e) const;
    CycleSet expr_influence(size_t e) const;

    std::shared_ptr<const Machine> machine_;
    std::vector<Value> store_;
    std::vector<uint64_t> live_;
    std::vector<CycleSet> infl_;
    std::vector<char> events_;
    std::vector<char> pending_;
    std::vector<ProcState> procs_;
    std::vector<std::deque<BufEntry>> buffers_;
    uint64_t cycle_ = 0;
    bool started_ = false;
    size_t cont_streak_ = 0;
};

/// One interpreter step; throws NoEnabledStep at the end of a cycle.
void micro_step(Configuration& c, Scheduler* scheduler = nullptr);

/// Starts the next cycle with the given issue bit (lane 0) and returns its label.
TraceEntry cycle_step(Configuration& c, bool issue, const InputSchedule& inputs);

/// Runs n_cycles labels; the issue bit is set exactly at t_issue, if given.
Trace run(const Program& program, const AnnotationSet& annots, const InputSchedule& inputs,
          std::optional<uint64_t> t_issue, size_t n_cycles);

/// Multi-lane run: issue_masks[i] lists the lanes issuing at cycle i.
Trace run_lanes(std::shared_ptr<const Machine> machine, const DenseInputs& inputs,
                const std::vector<uint64_t>& issue_masks, size_t n_cycles, Scheduler* scheduler = nullptr);

/// Same influence sets on every sink at every cycle.
bool check_ct_pair(const Trace& left, const Trace& right, const std::set<std::string>& sinks);

/// Same sink liveness at every cycle; both traces must be t-traces for the same t.
bool check_liveq_pair(const Trace& left, const Trace& right, const std::set<std::string>& sinks);

/// Lane-level check that a live variable has its lane's issue cycle in
/// its influence set. lane_issue[j] is lane j's issue cycle.
bool live_implies_influence(const Trace& trace, const std::vector<uint64_t>& lane_issue);

std::string trace_csv(const Trace& trace, unsigned lane = 0);
nlohmann::json trace_json(const Trace& trace, unsigned lane = 0);

}  // namespace ctlive
