#include "placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dcsopt/evaluator.hpp"

namespace dcsopt::detail {

ServiceMap build_service_map(const ProblemInstance& inst, const Topology& topo) {
    ServiceMap out;
    std::vector<const TopoNode*> leaves;
    for (const TopoNode& n : topo.nodes())
        if (n.level == inst.levels) leaves.push_back(&n);
    std::sort(leaves.begin(), leaves.end(),
              [](const TopoNode* a, const TopoNode* b) { return a->id < b->id; });

    for (const TopoNode* n : leaves) {
        LeafSlot slot;
        slot.leaf = n->id;
        slot.channels = inst.type(n->type).channels;
        int procs = 0;
        double delay = 0.0;
        for (NodeId id : root_path(topo, n->id)) {
            const DeviceType& t = inst.type(topo.node(id).type);
            if (t.is_processor()) {
                if (++procs == 1) slot.proc = id;
            } else if (procs == 0) {
                delay += t.delay;  // repeaters between the leaf and its processor
            }
        }
        if (procs != 1) {
            slot.proc = 0;
            out.one_proc_per_leaf = false;
        }
        slot.delay = delay;
        out.leaves.push_back(slot);
    }
    return out;
}

bool all_loops_identical(const ProblemInstance& inst) {
    for (const ControlLoop& a : inst.loops)
        if (a.signals != inst.loops[0].signals || a.memory_req != inst.loops[0].memory_req ||
            a.instructions != inst.loops[0].instructions)
            return false;
    return true;
}

namespace {

constexpr long long kInfCap = std::numeric_limits<long long>::max() / 4;

struct ProcGroup {
    NodeId proc = 0;
    std::vector<int> leaf_idx;      // indices into service.leaves, delay-ascending
    long long mem_cap = kInfCap;    // loop-count capacity from memory (identical loops)
    long long best_cap = 0;         // max loops this processor can serve
};

// Identical-loop closed form: per processor, sort its leaves by delay and take
// the best prefix under the combined channel/time/memory caps. The per-prefix
// cap is exact, so summing over processors decides feasibility outright.
std::optional<Placement> place_identical(const ProblemInstance& inst, const ServiceMap& service,
                                         const Topology& topo) {
    const ControlLoop& proto = inst.loops[0];
    const int n = proto.signals;
    const double r = proto.memory_req;
    const double w = proto.instructions;

    std::map<NodeId, ProcGroup> groups;
    for (std::size_t i = 0; i < service.leaves.size(); ++i) {
        const LeafSlot& slot = service.leaves[i];
        if (slot.proc == 0) continue;
        ProcGroup& g = groups[slot.proc];
        g.proc = slot.proc;
        g.leaf_idx.push_back(static_cast<int>(i));
    }

    for (auto& [proc, g] : groups) {
        const DeviceType& pt = inst.type(topo.node(proc).type);
        if (r > 0.0) g.mem_cap = static_cast<long long>(std::floor((pt.memory + kTol) / r));
        std::sort(g.leaf_idx.begin(), g.leaf_idx.end(), [&](int a, int b) {
            const LeafSlot& la = service.leaves[static_cast<std::size_t>(a)];
            const LeafSlot& lb = service.leaves[static_cast<std::size_t>(b)];
            if (la.delay != lb.delay) return la.delay < lb.delay;
            return la.leaf < lb.leaf;
        });
        long long chan_cum = 0;
        for (int idx : g.leaf_idx) {
            const LeafSlot& slot = service.leaves[static_cast<std::size_t>(idx)];
            chan_cum += slot.channels / n;
            long long time_cap = kInfCap;
            if (w * pt.instr_time > 0.0) {
                double room = inst.t_max + kTol - slot.delay;
                time_cap = room < 0.0 ? 0
                                      : static_cast<long long>(std::floor(room / (w * pt.instr_time)));
            } else if (slot.delay > inst.t_max + kTol) {
                time_cap = 0;
            }
            long long cap = std::min({chan_cum, time_cap, g.mem_cap});
            g.best_cap = std::max(g.best_cap, cap);
        }
    }

    const long long demand = static_cast<long long>(inst.loops.size());
    long long total = 0;
    for (const auto& [proc, g] : groups) total += g.best_cap;
    if (total < demand) return std::nullopt;

    // Cover the demand with as few leaves as possible: repeatedly commit the
    // leaf with the largest marginal capacity gain. Untouched siblings stay
    // empty, which leaves them free for the solvers' cleanup passes to drop.
    auto leaf_time_cap = [&](const LeafSlot& slot, const DeviceType& pt) {
        long long cap = kInfCap;
        if (w * pt.instr_time > 0.0) {
            double room = inst.t_max + kTol - slot.delay;
            cap = room < 0.0 ? 0
                             : static_cast<long long>(std::floor(room / (w * pt.instr_time)));
        } else if (slot.delay > inst.t_max + kTol) {
            cap = 0;
        }
        return cap;
    };
    struct Cursor {
        ProcGroup* g = nullptr;
        std::size_t next = 0;     // next unused index into g->leaf_idx
        long long cap = 0;        // capacity of the committed prefix
        long long chan_cum = 0;
        long long used = 0;       // leaves committed
    };
    std::vector<Cursor> cursors;
    for (auto& [proc, g] : groups) cursors.push_back({&g});
    auto marginal = [&](const Cursor& c) -> long long {
        if (c.next >= c.g->leaf_idx.size()) return -1;
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(c.g->leaf_idx[c.next])];
        const DeviceType& pt = inst.type(topo.node(c.g->proc).type);
        long long cap = std::min({c.chan_cum + slot.channels / n, leaf_time_cap(slot, pt),
                                  c.g->mem_cap});
        return std::max(cap, c.cap) - c.cap;
    };
    long long covered = 0;
    while (covered < demand) {
        std::size_t pick = cursors.size();
        long long best_gain = -1;
        for (std::size_t i = 0; i < cursors.size(); ++i) {
            long long gain = marginal(cursors[i]);
            if (gain > best_gain) {
                best_gain = gain;
                pick = i;
            }
        }
        if (pick == cursors.size() || best_gain < 0) return std::nullopt;  // defensive
        Cursor& c = cursors[pick];
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(c.g->leaf_idx[c.next])];
        c.chan_cum += slot.channels / n;
        c.cap += best_gain;
        ++c.next;
        ++c.used;
        covered += best_gain;
    }

    Placement placement;
    LoopId next = 1;
    long long remaining = demand;
    for (Cursor& c : cursors) {
        long long take = std::min(c.cap, remaining);
        remaining -= take;
        for (std::size_t k = 0; k < c.used && take > 0; ++k) {
            const LeafSlot& slot = service.leaves[static_cast<std::size_t>(c.g->leaf_idx[k])];
            long long here = std::min<long long>(slot.channels / n, take);
            for (long long j = 0; j < here; ++j) {
                placement.connection[next] = slot.leaf;
                placement.assignment[next] = c.g->proc;
                ++next;
            }
            take -= here;
        }
    }
    return placement;
}

struct BacktrackState {
    const ProblemInstance& inst;
    const ServiceMap& service;
    const Topology& topo;
    std::vector<int> order;               // loop indices, heaviest first
    std::vector<int> chan_rem;            // per leaf slot
    std::map<NodeId, double> mem_rem;
    std::map<NodeId, double> work;
    std::map<NodeId, double> delay_max;
    long long total_chan_rem = 0;
    long long states = 0;
    bool truncated = false;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    Placement placement;
};

constexpr long long kMaxStates = 5'000'000;

bool same_group(const ControlLoop& a, const ControlLoop& b) {
    return a.signals == b.signals && a.memory_req == b.memory_req &&
           a.instructions == b.instructions;
}

bool backtrack(BacktrackState& st, std::size_t i, int prev_leaf) {
    if (i == st.order.size()) return true;
    if (++st.states > kMaxStates ||
        (st.deadline && (st.states & 0x3ff) == 0 &&
         std::chrono::steady_clock::now() > *st.deadline)) {
        st.truncated = true;
        return false;
    }
    const ControlLoop& a = st.inst.loops[static_cast<std::size_t>(st.order[i])];

    long long remaining_signals = 0;
    for (std::size_t j = i; j < st.order.size(); ++j)
        remaining_signals += st.inst.loops[static_cast<std::size_t>(st.order[j])].signals;
    if (remaining_signals > st.total_chan_rem) return false;

    // Loops of one group are interchangeable: force non-decreasing leaf
    // indices within the group so permutations are visited once.
    int start = 0;
    if (i > 0 && same_group(a, st.inst.loops[static_cast<std::size_t>(st.order[i - 1])]))
        start = prev_leaf;

    for (int li = start; li < static_cast<int>(st.service.leaves.size()); ++li) {
        const LeafSlot& slot = st.service.leaves[static_cast<std::size_t>(li)];
        if (slot.proc == 0) continue;
        if (st.chan_rem[static_cast<std::size_t>(li)] < a.signals) continue;
        const DeviceType& pt = st.inst.type(st.topo.node(slot.proc).type);
        if (st.mem_rem[slot.proc] < a.memory_req - kTol) continue;
        double new_work = st.work[slot.proc] + a.instructions;
        double new_delay = std::max(st.delay_max[slot.proc], slot.delay);
        if (new_work * pt.instr_time + new_delay > st.inst.t_max + kTol) continue;

        st.chan_rem[static_cast<std::size_t>(li)] -= a.signals;
        st.total_chan_rem -= a.signals;
        st.mem_rem[slot.proc] -= a.memory_req;
        double old_work = st.work[slot.proc];
        double old_delay = st.delay_max[slot.proc];
        st.work[slot.proc] = new_work;
        st.delay_max[slot.proc] = new_delay;
        st.placement.connection[a.id] = slot.leaf;
        st.placement.assignment[a.id] = slot.proc;

        if (backtrack(st, i + 1, li)) return true;
        if (st.truncated) return false;

        st.chan_rem[static_cast<std::size_t>(li)] += a.signals;
        st.total_chan_rem += a.signals;
        st.mem_rem[slot.proc] += a.memory_req;
        st.work[slot.proc] = old_work;
        st.delay_max[slot.proc] = old_delay;
        st.placement.connection.erase(a.id);
        st.placement.assignment.erase(a.id);
    }
    return false;
}

std::optional<Placement> place_backtrack(const ProblemInstance& inst, const ServiceMap& service,
                                         const Topology& topo, bool* truncated,
                                         std::optional<std::chrono::steady_clock::time_point> deadline) {
    BacktrackState st{inst, service, topo};
    st.deadline = deadline;
    for (std::size_t i = 0; i < inst.loops.size(); ++i) st.order.push_back(static_cast<int>(i));
    std::sort(st.order.begin(), st.order.end(), [&](int x, int y) {
        const ControlLoop& a = inst.loops[static_cast<std::size_t>(x)];
        const ControlLoop& b = inst.loops[static_cast<std::size_t>(y)];
        if (a.signals != b.signals) return a.signals > b.signals;
        if (a.memory_req != b.memory_req) return a.memory_req > b.memory_req;
        if (a.instructions != b.instructions) return a.instructions > b.instructions;
        return a.id < b.id;
    });
    for (const LeafSlot& slot : service.leaves) {
        st.chan_rem.push_back(slot.channels);
        st.total_chan_rem += slot.channels;
        if (slot.proc != 0 && !st.mem_rem.count(slot.proc)) {
            st.mem_rem[slot.proc] = inst.type(topo.node(slot.proc).type).memory;
            st.work[slot.proc] = 0.0;
            st.delay_max[slot.proc] = 0.0;
        }
    }
    if (backtrack(st, 0, 0)) return st.placement;
    if (st.truncated && truncated) *truncated = true;
    return std::nullopt;
}

// Large heterogeneous instances: first-fit-decreasing with a bounded repair
// phase. Deliberately incomplete; a miss makes the oracle treat the structure
// as unplaceable.
std::optional<Placement> place_ffd(const ProblemInstance& inst, const ServiceMap& service,
                                   const Topology& topo) {
    std::vector<int> order;
    for (std::size_t i = 0; i < inst.loops.size(); ++i) order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const ControlLoop& a = inst.loops[static_cast<std::size_t>(x)];
        const ControlLoop& b = inst.loops[static_cast<std::size_t>(y)];
        if (a.signals != b.signals) return a.signals > b.signals;
        return a.id < b.id;
    });
    std::vector<int> leaf_order;
    for (std::size_t i = 0; i < service.leaves.size(); ++i)
        if (service.leaves[i].proc != 0) leaf_order.push_back(static_cast<int>(i));
    std::sort(leaf_order.begin(), leaf_order.end(), [&](int a, int b) {
        const LeafSlot& la = service.leaves[static_cast<std::size_t>(a)];
        const LeafSlot& lb = service.leaves[static_cast<std::size_t>(b)];
        if (la.delay != lb.delay) return la.delay < lb.delay;
        return la.leaf < lb.leaf;
    });

    std::vector<int> chan_rem;
    for (const LeafSlot& slot : service.leaves) chan_rem.push_back(slot.channels);
    std::map<NodeId, double> mem_rem, work, delay_max;
    for (const LeafSlot& slot : service.leaves)
        if (slot.proc != 0 && !mem_rem.count(slot.proc)) {
            mem_rem[slot.proc] = inst.type(topo.node(slot.proc).type).memory;
            work[slot.proc] = 0.0;
            delay_max[slot.proc] = 0.0;
        }

    std::map<LoopId, int> placed_at;  // loop -> leaf slot index
    auto fits = [&](const ControlLoop& a, int li) {
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(li)];
        if (chan_rem[static_cast<std::size_t>(li)] < a.signals) return false;
        const DeviceType& pt = inst.type(topo.node(slot.proc).type);
        if (mem_rem[slot.proc] < a.memory_req - kTol) return false;
        double nw = work[slot.proc] + a.instructions;
        double nd = std::max(delay_max[slot.proc], slot.delay);
        return nw * pt.instr_time + nd <= inst.t_max + kTol;
    };
    auto apply = [&](const ControlLoop& a, int li) {
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(li)];
        chan_rem[static_cast<std::size_t>(li)] -= a.signals;
        mem_rem[slot.proc] -= a.memory_req;
        work[slot.proc] += a.instructions;
        delay_max[slot.proc] = std::max(delay_max[slot.proc], slot.delay);
        placed_at[a.id] = li;
    };
    auto retract = [&](const ControlLoop& a) {
        int li = placed_at.at(a.id);
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(li)];
        chan_rem[static_cast<std::size_t>(li)] += a.signals;
        mem_rem[slot.proc] += a.memory_req;
        work[slot.proc] -= a.instructions;
        placed_at.erase(a.id);
        delay_max[slot.proc] = 0.0;  // recompute the served-delay maximum
        for (const auto& [loop, at] : placed_at) {
            const LeafSlot& s = service.leaves[static_cast<std::size_t>(at)];
            if (s.proc == slot.proc)
                delay_max[slot.proc] = std::max(delay_max[slot.proc], s.delay);
        }
    };

    std::vector<int> unplaced;
    for (int oi : order) {
        const ControlLoop& a = inst.loops[static_cast<std::size_t>(oi)];
        bool done = false;
        for (int li : leaf_order)
            if (fits(a, li)) { apply(a, li); done = true; break; }
        if (!done) unplaced.push_back(oi);
    }

    for (int pass = 0; pass < 3 && !unplaced.empty(); ++pass) {
        std::vector<int> still;
        for (int oi : unplaced) {
            const ControlLoop& a = inst.loops[static_cast<std::size_t>(oi)];
            bool done = false;
            for (int li : leaf_order) {
                if (done) break;
                // Evict one loop from this leaf to another, then retry.
                std::vector<LoopId> here;
                for (const auto& [loop, at] : placed_at)
                    if (at == li) here.push_back(loop);
                for (LoopId b_id : here) {
                    const ControlLoop& b = inst.loops[static_cast<std::size_t>(b_id - 1)];
                    retract(b);
                    int new_home = -1;
                    for (int lj : leaf_order)
                        if (lj != li && fits(b, lj)) { new_home = lj; break; }
                    if (new_home >= 0 && (apply(b, new_home), fits(a, li))) {
                        apply(a, li);
                        done = true;
                        break;
                    }
                    if (new_home >= 0) retract(b);
                    apply(b, li);  // restore
                }
            }
            if (!done) still.push_back(oi);
        }
        if (still.size() == unplaced.size()) { unplaced = still; break; }
        unplaced = still;
    }
    if (!unplaced.empty()) return std::nullopt;

    Placement placement;
    for (const auto& [loop, li] : placed_at) {
        const LeafSlot& slot = service.leaves[static_cast<std::size_t>(li)];
        placement.connection[loop] = slot.leaf;
        placement.assignment[loop] = slot.proc;
    }
    return placement;
}

} // namespace

std::optional<Placement> find_placement(
    const ProblemInstance& inst, const Topology& topo, const ServiceMap& service, bool* truncated,
    std::optional<std::chrono::steady_clock::time_point> deadline) {
    if (!service.one_proc_per_leaf) return std::nullopt;  // structure violates coordination
    if (inst.loops.empty()) return Placement{};
    if (all_loops_identical(inst)) return place_identical(inst, service, topo);
    if (inst.loops.size() <= 12) return place_backtrack(inst, service, topo, truncated, deadline);
    return place_ffd(inst, service, topo);
}

std::optional<Placement> place_fast(const ProblemInstance& inst, const Topology& topo,
                                    const ServiceMap& service) {
    if (!service.one_proc_per_leaf) return std::nullopt;
    if (inst.loops.empty()) return Placement{};
    if (all_loops_identical(inst)) return place_identical(inst, service, topo);
    return place_ffd(inst, service, topo);
}

} // namespace dcsopt::detail
