#include "dcsopt/exact.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "placement.hpp"

namespace dcsopt {

const char* exact_status_name(ExactStatus s) {
    switch (s) {
        case ExactStatus::Optimal: return "Optimal";
        case ExactStatus::InfeasibleProven: return "InfeasibleProven";
        case ExactStatus::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

namespace {

constexpr long long kInfCap = std::numeric_limits<long long>::max() / 4;

long long clamp_add(long long a, long long b) {
    return (a > kInfCap - b) ? kInfCap : a + b;
}

// Smallest repeater store-and-forward delay, or nullopt when the catalog has
// no repeater at all (then no processor can sit above leaf level).
std::optional<double> min_repeater_delay(const ProblemInstance& inst) {
    std::optional<double> out;
    for (const DeviceType& t : inst.catalog)
        if (!t.is_processor() && (!out || t.delay < *out)) out = t.delay;
    return out;
}

// Optimistic number of loops a processor of this type at this level could
// serve, relaxing everything except memory, minimum path delay and (for leaf
// processors) own channels.
long long proc_capacity(const ProblemInstance& inst, const DeviceType& t, int level,
                        std::optional<double> tau_min, int n_min, double r_min, double w_min) {
    if (!t.is_processor()) return 0;
    const int hops = inst.levels - level;
    double delay = 0.0;
    if (hops > 0) {
        if (!tau_min) return 0;  // nothing to relay through
        delay = hops * *tau_min;
    }
    double room = inst.t_max + kTol - delay;
    if (room < 0.0) return 0;

    long long cap = kInfCap;
    if (w_min * t.instr_time > 0.0)
        cap = std::min(cap, static_cast<long long>(std::floor(room / (w_min * t.instr_time))));
    if (r_min > 0.0)
        cap = std::min(cap, static_cast<long long>(std::floor((t.memory + kTol) / r_min)));
    if (level == inst.levels)  // a leaf processor serves only its own channels
        cap = std::min(cap, static_cast<long long>(t.channels / n_min));
    return cap;
}

} // namespace

long long processor_capacity(const ProblemInstance& inst, const DeviceType& type, int level) {
    if (inst.loops.empty()) return 0;
    int n_min = std::numeric_limits<int>::max();
    double r_min = std::numeric_limits<double>::max();
    double w_min = std::numeric_limits<double>::max();
    for (const ControlLoop& a : inst.loops) {
        n_min = std::min(n_min, a.signals);
        r_min = std::min(r_min, a.memory_req);
        w_min = std::min(w_min, static_cast<double>(a.instructions));
    }
    return proc_capacity(inst, type, level, min_repeater_delay(inst), n_min, r_min, w_min);
}

bool capacity_bound(const ProblemInstance& inst, const CapacitySnapshot& partial) {
    if (inst.loops.empty()) return true;

    long long total_signals = 0;
    int n_min = std::numeric_limits<int>::max();
    double r_min = std::numeric_limits<double>::max();
    double w_min = std::numeric_limits<double>::max();
    for (const ControlLoop& a : inst.loops) {
        total_signals += a.signals;
        n_min = std::min(n_min, a.signals);
        r_min = std::min(r_min, a.memory_req);
        w_min = std::min(w_min, static_cast<double>(a.instructions));
    }
    int max_channels = 0;
    for (const DeviceType& t : inst.catalog) max_channels = std::max(max_channels, t.channels);

    long long reachable = clamp_add(partial.placed_leaf_channels,
                                    static_cast<long long>(partial.remaining_budget) * max_channels);
    if (reachable < total_signals) return false;

    std::optional<double> tau_min = min_repeater_delay(inst);
    long long served = 0;
    for (const auto& [level, type_id] : partial.processors)
        served = clamp_add(served, proc_capacity(inst, inst.type(type_id), level, tau_min, n_min,
                                                 r_min, w_min));
    if (partial.can_add_processor && partial.remaining_budget > 0) {
        long long best = 0;
        for (const DeviceType& t : inst.catalog)
            for (int level = 1; level <= inst.levels; ++level)
                best = std::max(best, proc_capacity(inst, t, level, tau_min, n_min, r_min, w_min));
        if (best >= kInfCap)
            served = kInfCap;
        else
            served = clamp_add(served, partial.remaining_budget * best);
    }
    return served >= static_cast<long long>(inst.loops.size());
}

namespace {

/// A complete subtree pattern: device type at its root plus a canonically
/// ordered multiset of child patterns one level down. Patterns are shared —
/// the device pool is unlimited, so a subtree's feasibility never depends on
/// where it stands.
struct Shape {
    int type = 0;
    std::vector<int> children;                 // indices into the next-lower catalog
    double cost = 0.0;
    int nodes = 1;
    long long leaf_channels = 0;
    std::vector<std::pair<int, int>> procs;    // (level, type id)
    std::string sig;
};

constexpr long long kMaxShapes = 500'000;

struct Search {
    const ProblemInstance& inst;
    SearchLimits limits;
    const ExactOptions& opt;
    int S = 1;
    int cap = 0;
    std::chrono::steady_clock::time_point deadline;
    bool aborted = false;
    long long tick = 0;

    // cat[d][ctx]: depth-d subtree shapes; ctx 1 = a processor already sits above
    std::vector<std::array<std::vector<Shape>, 2>> cat;
    long long shape_count = 0;

    double best_cost = std::numeric_limits<double>::infinity();
    std::string best_sig;
    std::optional<Solution> best;
    long long explored = 0;

    bool time_up() {
        if (aborted) return true;
        if ((++tick & 0x3ff) != 0) return false;
        if (std::chrono::steady_clock::now() > deadline) aborted = true;
        return aborted;
    }
};

std::string compose_sig(int type, std::vector<std::string> child_sigs) {
    std::sort(child_sigs.begin(), child_sigs.end());
    std::string out = "(" + std::to_string(type) + ":";
    for (const std::string& s : child_sigs) out += s;
    out += ")";
    return out;
}

void build_catalogs(Search& s) {
    s.cat.resize(static_cast<std::size_t>(s.S));
    // depth 1: bare leaves at level S
    for (int ctx = 0; ctx < 2; ++ctx) {
        for (const DeviceType& t : s.inst.catalog) {
            if (s.opt.prune_path) {
                // exactly one processor per leaf-to-root path: a leaf is a
                // processor precisely when none sits above it
                if (ctx == 1 && t.is_processor()) continue;
                if (ctx == 0 && !t.is_processor()) continue;
            }
            if (1 > s.cap - (s.S - 1)) continue;
            Shape sh;
            sh.type = t.id;
            sh.cost = t.cost;
            sh.leaf_channels = t.channels;
            if (t.is_processor()) sh.procs.emplace_back(s.S, t.id);
            sh.sig = compose_sig(t.id, {});
            s.cat[1][static_cast<std::size_t>(ctx)].push_back(std::move(sh));
        }
        auto& pool = s.cat[1][static_cast<std::size_t>(ctx)];
        std::sort(pool.begin(), pool.end(), [](const Shape& a, const Shape& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.nodes != b.nodes) return a.nodes < b.nodes;
            return a.sig < b.sig;
        });
    }

    for (int d = 2; d <= s.S - 1 && !s.aborted; ++d) {
        const int level = s.S - d + 1;
        const int budget = s.cap - (level - 1);
        for (int ctx = 0; ctx < 2 && !s.aborted; ++ctx) {
            for (const DeviceType& t : s.inst.catalog) {
                if (s.aborted) break;
                if (s.opt.prune_path && ctx == 1 && t.is_processor()) continue;
                const int child_ctx = (ctx == 1 || t.is_processor()) ? 1 : 0;
                const auto& pool = s.cat[d - 1][static_cast<std::size_t>(child_ctx)];
                if (pool.empty()) continue;

                Shape cur;
                cur.type = t.id;
                cur.cost = t.cost;
                if (t.is_processor()) cur.procs.emplace_back(level, t.id);
                std::vector<std::string> child_sigs;

                auto rec = [&](auto&& self, int start) -> void {
                    if (s.time_up()) return;
                    if (!cur.children.empty()) {
                        Shape emit = cur;
                        emit.sig = compose_sig(cur.type, child_sigs);
                        s.cat[d][static_cast<std::size_t>(ctx)].push_back(std::move(emit));
                        if (++s.shape_count > kMaxShapes) {
                            s.aborted = true;
                            return;
                        }
                    }
                    if (static_cast<int>(cur.children.size()) == t.max_children) return;
                    for (int idx = start; idx < static_cast<int>(pool.size()); ++idx) {
                        const Shape& c = pool[static_cast<std::size_t>(idx)];
                        if (cur.nodes + c.nodes > budget) continue;
                        cur.children.push_back(idx);
                        cur.cost += c.cost;
                        cur.nodes += c.nodes;
                        cur.leaf_channels += c.leaf_channels;
                        cur.procs.insert(cur.procs.end(), c.procs.begin(), c.procs.end());
                        child_sigs.push_back(c.sig);
                        self(self, idx);
                        child_sigs.pop_back();
                        cur.procs.resize(cur.procs.size() - c.procs.size());
                        cur.leaf_channels -= c.leaf_channels;
                        cur.nodes -= c.nodes;
                        cur.cost -= c.cost;
                        cur.children.pop_back();
                        if (s.aborted) return;
                    }
                };
                rec(rec, 0);
            }
            auto& out_pool = s.cat[d][static_cast<std::size_t>(ctx)];
            std::sort(out_pool.begin(), out_pool.end(), [](const Shape& a, const Shape& b) {
                if (a.cost != b.cost) return a.cost < b.cost;
                if (a.nodes != b.nodes) return a.nodes < b.nodes;
                return a.sig < b.sig;
            });
        }
    }
}

void instantiate(Search& s, Topology& topo, NodeId parent, int depth, int ctx, int shape_idx) {
    const Shape& sh = s.cat[depth][static_cast<std::size_t>(ctx)][static_cast<std::size_t>(shape_idx)];
    NodeId id = topo.add_child(parent, sh.type);
    if (depth == 1) return;
    const bool proc = s.inst.type(sh.type).is_processor();
    const int child_ctx = (ctx == 1 || proc) ? 1 : 0;
    const auto& pool = s.cat[depth - 1][static_cast<std::size_t>(child_ctx)];
    std::vector<int> order = sh.children;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return pool[static_cast<std::size_t>(a)].sig < pool[static_cast<std::size_t>(b)].sig;
    });
    for (int idx : order) instantiate(s, topo, id, depth - 1, child_ctx, idx);
}

void consider(Search& s, const DeviceType& root_type, const std::vector<int>& chosen, double cost,
              long long leaf_channels, const std::vector<std::pair<int, int>>& procs) {
    if (s.time_up()) return;
    if (s.opt.prune_cost && cost > s.best_cost + kTol) return;

    const int child_ctx = root_type.is_processor() ? 1 : 0;
    Topology topo;
    NodeId root = topo.add_root(root_type.id);
    std::string sig;
    if (s.S == 1) {
        sig = compose_sig(root_type.id, {});
    } else {
        const auto& pool = s.cat[s.S - 1][static_cast<std::size_t>(child_ctx)];
        std::vector<int> order = chosen;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pool[static_cast<std::size_t>(a)].sig < pool[static_cast<std::size_t>(b)].sig;
        });
        std::vector<std::string> child_sigs;
        for (int idx : order) {
            instantiate(s, topo, root, s.S - 1, child_ctx, idx);
            child_sigs.push_back(pool[static_cast<std::size_t>(idx)].sig);
        }
        sig = compose_sig(root_type.id, std::move(child_sigs));
    }

    ++s.explored;
    if (s.opt.on_topology) s.opt.on_topology(topo);

    if (s.opt.prune_capacity) {
        CapacitySnapshot snap;
        snap.placed_leaf_channels =
            (s.S == 1) ? static_cast<long long>(root_type.channels) : leaf_channels;
        snap.processors = procs;
        snap.remaining_budget = 0;
        snap.can_add_processor = false;
        if (!capacity_bound(s.inst, snap)) return;
    }

    detail::ServiceMap svc = detail::build_service_map(s.inst, topo);
    bool truncated = false;
    std::optional<Placement> placement =
        detail::find_placement(s.inst, topo, svc, &truncated, s.deadline);
    if (truncated) {
        s.aborted = true;
        return;
    }
    if (!placement) return;

    Solution sol{std::move(topo), std::move(*placement)};
    EvaluationReport rep = evaluate(s.inst, sol);
    if (!rep.feasible) return;

    if (!s.best || rep.cost < s.best_cost - kTol ||
        (rep.cost <= s.best_cost + kTol && sig < s.best_sig)) {
        s.best = std::move(sol);
        s.best_cost = rep.cost;
        s.best_sig = sig;
    }
}

void run_root(Search& s) {
    for (const DeviceType& t : s.inst.catalog) {
        if (s.aborted) return;
        if (s.S == 1) {
            if (s.opt.prune_path && !t.is_processor()) continue;
            if (s.cap < 1) continue;
            std::vector<std::pair<int, int>> procs;
            if (t.is_processor()) procs.emplace_back(1, t.id);
            consider(s, t, {}, t.cost, t.channels, procs);
            continue;
        }

        const int child_ctx = t.is_processor() ? 1 : 0;
        const auto& pool = s.cat[s.S - 1][static_cast<std::size_t>(child_ctx)];
        if (pool.empty()) continue;

        std::vector<int> chosen;
        double cost = t.cost;
        int nodes = 1;
        long long chans = 0;
        std::vector<std::pair<int, int>> procs;
        if (t.is_processor()) procs.emplace_back(1, t.id);

        auto rec = [&](auto&& self, int start) -> void {
            if (s.time_up()) return;
            if (!chosen.empty()) consider(s, t, chosen, cost, chans, procs);
            if (static_cast<int>(chosen.size()) == t.max_children) return;
            for (int idx = start; idx < static_cast<int>(pool.size()); ++idx) {
                const Shape& c = pool[static_cast<std::size_t>(idx)];
                if (s.opt.prune_cost && cost + c.cost > s.best_cost + kTol) break;
                if (nodes + c.nodes > s.cap) continue;
                if (s.opt.prune_capacity) {
                    CapacitySnapshot snap;
                    snap.placed_leaf_channels = chans + c.leaf_channels;
                    snap.processors = procs;
                    snap.processors.insert(snap.processors.end(), c.procs.begin(), c.procs.end());
                    snap.remaining_budget = s.cap - (nodes + c.nodes);
                    snap.can_add_processor =
                        snap.remaining_budget > 0 && (child_ctx == 0 || !s.opt.prune_path);
                    if (!capacity_bound(s.inst, snap)) continue;
                }
                chosen.push_back(idx);
                cost += c.cost;
                nodes += c.nodes;
                chans += c.leaf_channels;
                procs.insert(procs.end(), c.procs.begin(), c.procs.end());
                self(self, idx);
                procs.resize(procs.size() - c.procs.size());
                chans -= c.leaf_channels;
                nodes -= c.nodes;
                cost -= c.cost;
                chosen.pop_back();
                if (s.aborted) return;
            }
        };
        rec(rec, 0);
    }
}

int derive_cap(const ProblemInstance& inst, const SearchLimits& limits) {
    int max_fan = 1;
    for (const DeviceType& t : inst.catalog) max_fan = std::max(max_fan, t.max_children);
    double structural = 0.0, width = 1.0;
    for (int level = 1; level <= inst.levels; ++level) {
        structural += width;
        width *= max_fan;
        if (structural > 1e9) { structural = 1e9; break; }
    }
    double by_formula = inst.levels * std::pow(static_cast<double>(max_fan), inst.levels - 1);
    int cap = static_cast<int>(std::min({structural, by_formula, 1e9}));
    if (limits.max_total_nodes > 0) cap = std::min(cap, limits.max_total_nodes);
    return cap;
}

} // namespace

ExactResult solve_exact(const ProblemInstance& inst, const SearchLimits& limits,
                        const ExactOptions& options) {
    inst.validate(nullptr);
    Search s{inst, limits, options};
    s.S = inst.levels;
    s.cap = derive_cap(inst, limits);
    s.deadline = std::chrono::steady_clock::now() +
                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(limits.time_budget));

    if (s.S >= 2) build_catalogs(s);
    if (!s.aborted) run_root(s);

    ExactResult out;
    out.nodes_explored = s.explored;
    if (s.best) {
        out.best = s.best;
        out.cost = s.best_cost;
    }
    if (s.aborted)
        out.status = ExactStatus::BudgetExhausted;
    else
        out.status = s.best ? ExactStatus::Optimal : ExactStatus::InfeasibleProven;
    return out;
}

} // namespace dcsopt
