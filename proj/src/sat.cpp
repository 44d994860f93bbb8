#include "ctlive/sat.hpp"

#include <algorithm>

namespace ctlive::sat {

Solver::Solver() = default;

uint32_t Solver::new_var() {
    uint32_t v = num_vars();
    assigns_.push_back(kUndef);
    levels_.push_back(0);
    reasons_.push_back(-1);
    phase_.push_back(false);
    model_.push_back(false);
    activity_.push_back(0);
    heap_pos_.push_back(-1);
    seen_.push_back(0);
    watches_.emplace_back();
    watches_.emplace_back();
    heap_insert(v);
    return v;
}

// ---------------------------------------------------------------------------
// Heap

void Solver::heap_up(size_t i) {
    uint32_t v = heap_[i];
    while (i > 0) {
        size_t parent = (i - 1) / 2;
        if (!heap_less(v, heap_[parent])) break;
        heap_[i] = heap_[parent];
        heap_pos_[heap_[i]] = static_cast<int32_t>(i);
        i = parent;
    }
    heap_[i] = v;
    heap_pos_[v] = static_cast<int32_t>(i);
}

void Solver::heap_down(size_t i) {
    uint32_t v = heap_[i];
    for (;;) {
        size_t child = 2 * i + 1;
        if (child >= heap_.size()) break;
        if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child])) ++child;
        if (!heap_less(heap_[child], v)) break;
        heap_[i] = heap_[child];
        heap_pos_[heap_[i]] = static_cast<int32_t>(i);
        i = child;
    }
    heap_[i] = v;
    heap_pos_[v] = static_cast<int32_t>(i);
}

void Solver::heap_insert(uint32_t v) {
    if (heap_pos_[v] >= 0) return;
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
}

uint32_t Solver::heap_pop() {
    uint32_t top = heap_[0];
    heap_pos_[top] = -1;
    uint32_t last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_pos_[last] = 0;
        heap_down(0);
    }
    return top;
}

void Solver::bump_var(uint32_t v) {
    if ((activity_[v] += var_inc_) > 1e100) {
        for (auto& a : activity_) a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_up(static_cast<size_t>(heap_pos_[v]));
}

void Solver::bump_clause(Clause& c) {
    if ((c.activity += clause_inc_) > 1e20) {
        for (auto& cl : clauses_)
            if (cl.learnt) cl.activity *= 1e-20;
        clause_inc_ *= 1e-20;
    }
}

// ---------------------------------------------------------------------------
// Clauses and propagation

uint32_t Solver::attach(std::vector<Lit> lits, bool learnt) {
    uint32_t idx;
    if (!free_clauses_.empty()) {
        idx = free_clauses_.back();
        free_clauses_.pop_back();
        clauses_[idx] = Clause{std::move(lits), learnt, 0};
    } else {
        idx = static_cast<uint32_t>(clauses_.size());
        clauses_.push_back(Clause{std::move(lits), learnt, 0});
    }
    const auto& c = clauses_[idx].lits;
    watches_[neg(c[0])].push_back({idx, c[1]});
    watches_[neg(c[1])].push_back({idx, c[0]});
    if (learnt) ++num_learnts_;
    return idx;
}

bool Solver::add_clause(std::vector<Lit> lits) {
    if (!ok_) return false;
    backtrack(0);
    std::sort(lits.begin(), lits.end());
    std::vector<Lit> out;
    for (size_t i = 0; i < lits.size(); ++i) {
        Lit l = lits[i];
        if (value(l) == kTrue || (i + 1 < lits.size() && lits[i + 1] == neg(l))) return true;
        if (value(l) == kFalse || (!out.empty() && out.back() == l)) continue;
        out.push_back(l);
    }
    if (out.empty()) return ok_ = false;
    if (out.size() == 1) {
        assign(out[0], -1);
        return ok_ = propagate() < 0;
    }
    attach(std::move(out), false);
    return true;
}

void Solver::assign(Lit l, int32_t reason) {
    uint32_t v = var_of(l);
    assigns_[v] = is_neg(l) ? kFalse : kTrue;
    levels_[v] = level();
    reasons_[v] = reason;
    trail_.push_back(l);
}

int32_t Solver::propagate() {
    while (qhead_ < trail_.size()) {
        Lit p = trail_[qhead_++];
        auto& ws = watches_[p];
        Lit false_lit = neg(p);
        size_t i = 0, j = 0;
        while (i < ws.size()) {
            Watch w = ws[i];
            if (value(w.blocker) == kTrue) {
                ws[j++] = ws[i++];
                continue;
            }
            auto& c = clauses_[w.clause].lits;
            if (c[0] == false_lit) std::swap(c[0], c[1]);
            ++i;
            if (value(c[0]) == kTrue) {
                ws[j++] = {w.clause, c[0]};
                continue;
            }
            bool moved = false;
            for (size_t k = 2; k < c.size(); ++k)
                if (value(c[k]) != kFalse) {
                    std::swap(c[1], c[k]);
                    watches_[neg(c[1])].push_back({w.clause, c[0]});
                    moved = true;
                    break;
                }
            if (moved) continue;
            ws[j++] = {w.clause, c[0]};
            if (value(c[0]) == kFalse) {
                while (i < ws.size()) ws[j++] = ws[i++];
                ws.resize(j);
                qhead_ = trail_.size();
                return static_cast<int32_t>(w.clause);
            }
            assign(c[0], static_cast<int32_t>(w.clause));
        }
        ws.resize(j);
    }
    return -1;
}

// First-UIP conflict analysis.
void Solver::analyze(int32_t conflict, std::vector<Lit>& learnt, uint32_t& back_level) {
    learnt.assign(1, 0);
    int pending = 0;
    Lit p = 0;
    bool first = true;
    size_t idx = trail_.size();
    for (;;) {
        Clause& c = clauses_[static_cast<size_t>(conflict)];
        if (c.learnt) bump_clause(c);
        for (size_t k = first ? 0 : 1; k < c.lits.size(); ++k) {
            Lit q = c.lits[k];
            uint32_t v = var_of(q);
            if (seen_[v] || levels_[v] == 0) continue;
            seen_[v] = 1;
            bump_var(v);
            if (levels_[v] >= level())
                ++pending;
            else
                learnt.push_back(q);
        }
        first = false;
        do {
            p = trail_[--idx];
        } while (!seen_[var_of(p)]);
        seen_[var_of(p)] = 0;
        if (--pending == 0) break;
        conflict = reasons_[var_of(p)];
        // The reason clause keeps the implied literal first.
        auto& rl = clauses_[static_cast<size_t>(conflict)].lits;
        if (rl[0] != p) std::swap(rl[0], rl[1]);
    }
    learnt[0] = neg(p);
    back_level = 0;
    size_t max_i = 1;
    for (size_t k = 1; k < learnt.size(); ++k) {
        seen_[var_of(learnt[k])] = 0;
        if (levels_[var_of(learnt[k])] > back_level) {
            back_level = levels_[var_of(learnt[k])];
            max_i = k;
        }
    }
    if (learnt.size() > 1) std::swap(learnt[1], learnt[max_i]);
}

void Solver::backtrack(uint32_t lvl) {
    if (level() <= lvl) return;
    for (size_t i = trail_.size(); i-- > trail_lim_[lvl];) {
        uint32_t v = var_of(trail_[i]);
        phase_[v] = !is_neg(trail_[i]);
        assigns_[v] = kUndef;
        reasons_[v] = -1;
        heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
    while (!heap_.empty()) {
        uint32_t v = heap_pop();
        if (assigns_[v] == kUndef) return mk_lit(v, !phase_[v]);
    }
    return UINT32_MAX;
}

void Solver::reduce_learnts() {
    std::vector<uint32_t> idx;
    for (uint32_t i = 0; i < clauses_.size(); ++i) {
        const auto& c = clauses_[i];
        if (!c.learnt || c.lits.size() <= 2) continue;
        uint32_t v = var_of(c.lits[0]);
        if (reasons_[v] == static_cast<int32_t>(i) && assigns_[v] != kUndef) continue;  // locked
        idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](uint32_t a, uint32_t b) { return clauses_[a].activity < clauses_[b].activity; });
    std::vector<char> drop(clauses_.size(), 0);
    for (size_t k = 0; k < idx.size() / 2; ++k) drop[idx[k]] = 1;
    for (auto& ws : watches_)
        ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watch& w) { return drop[w.clause]; }), ws.end());
    for (uint32_t i = 0; i < clauses_.size(); ++i)
        if (drop[i]) {
            clauses_[i].lits.clear();
            clauses_[i].learnt = false;
            free_clauses_.push_back(i);
            --num_learnts_;
        }
}

static uint64_t luby(uint64_t i) {
    uint64_t size = 1, seq = 0;
    while (size < i + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != i) {
        size = (size - 1) >> 1;
        --seq;
        i = i % size;
    }
    return uint64_t(1) << seq;
}

Result Solver::solve(const std::vector<Lit>& assumptions) {
    if (!ok_) return Result::Unsat;
    backtrack(0);
    if (propagate() >= 0) {
        ok_ = false;
        return Result::Unsat;
    }
    uint64_t restart = 0, budget = 100 * luby(0), since_restart = 0;
    size_t max_learnts = std::max<size_t>(clauses_.size() / 3, 2000);
    std::vector<Lit> learnt;
    for (;;) {
        int32_t confl = propagate();
        if (confl >= 0) {
            ++conflicts_;
            ++since_restart;
            if (level() == 0) {
                ok_ = false;
                return Result::Unsat;
            }
            uint32_t back = 0;
            analyze(confl, learnt, back);
            backtrack(back);
            if (learnt.size() == 1) {
                assign(learnt[0], -1);
            } else {
                uint32_t idx = attach(learnt, true);
                bump_clause(clauses_[idx]);
                assign(learnt[0], static_cast<int32_t>(idx));
            }
            var_inc_ /= 0.95;
            clause_inc_ /= 0.999;
            continue;
        }
        if (since_restart >= budget) {
            since_restart = 0;
            budget = 100 * luby(++restart);
            backtrack(0);
            if (num_learnts_ > max_learnts) {
                reduce_learnts();
                max_learnts += max_learnts / 10;
            }
            continue;
        }
        // Assumptions occupy the first decision levels.
        Lit next = UINT32_MAX;
        while (level() < assumptions.size()) {
            Lit a = assumptions[level()];
            if (value(a) == kTrue) {
                trail_lim_.push_back(static_cast<uint32_t>(trail_.size()));
            } else if (value(a) == kFalse) {
                backtrack(0);
                return Result::Unsat;
            } else {
                next = a;
                break;
            }
        }
        if (next == UINT32_MAX) {
            next = pick_branch();
            if (next == UINT32_MAX) {
                for (uint32_t v = 0; v < num_vars(); ++v) model_[v] = assigns_[v] == kTrue;
                backtrack(0);
                return Result::Sat;
            }
        }
        trail_lim_.push_back(static_cast<uint32_t>(trail_.size()));
        assign(next, -1);
    }
}

}  // namespace ctlive::sat
