#include "dcsopt/aco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dcsopt/exact.hpp"
#include "placement.hpp"

namespace dcsopt {

double PheromoneTable::trail(const PheromoneKey& key) const {
    auto it = trails_.find(key);
    return it == trails_.end() ? tau0_ : it->second;
}

void PheromoneTable::add(const PheromoneKey& key, double delta) {
    auto it = trails_.find(key);
    if (it == trails_.end())
        trails_.emplace(key, tau0_ + delta);
    else
        it->second += delta;
}

void PheromoneTable::evaporate(double rho) {
    for (auto& [key, v] : trails_) v = std::max(tau_min_, v * (1.0 - rho));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0))
        return std::min(w.size() - 1, static_cast<std::size_t>(uniform01(rng) * w.size()));
    double r = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (r < acc) return i;
    }
    return w.size() - 1;
}

// Greedy channel-only fill so even a hopeless candidate carries connection and
// assignment maps for the evaluator to criticise.
Placement fallback_fill(const ProblemInstance& inst, const detail::ServiceMap& svc) {
    Placement p;
    std::vector<int> order;
    for (std::size_t i = 0; i < svc.leaves.size(); ++i)
        if (svc.leaves[i].proc != 0) order.push_back(static_cast<int>(i));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const detail::LeafSlot& la = svc.leaves[static_cast<std::size_t>(a)];
        const detail::LeafSlot& lb = svc.leaves[static_cast<std::size_t>(b)];
        if (la.delay != lb.delay) return la.delay < lb.delay;
        return la.leaf < lb.leaf;
    });
    std::vector<int> chan_rem;
    for (const detail::LeafSlot& s : svc.leaves) chan_rem.push_back(s.channels);
    for (const ControlLoop& a : inst.loops) {
        for (int li : order) {
            if (chan_rem[static_cast<std::size_t>(li)] < a.signals) continue;
            chan_rem[static_cast<std::size_t>(li)] -= a.signals;
            p.connection[a.id] = svc.leaves[static_cast<std::size_t>(li)].leaf;
            p.assignment[a.id] = svc.leaves[static_cast<std::size_t>(li)].proc;
            break;
        }
    }
    return p;
}

int min_signals(const ProblemInstance& inst) {
    int out = std::numeric_limits<int>::max();
    for (const ControlLoop& a : inst.loops) out = std::min(out, a.signals);
    return out;
}

// Cheapest repeater, preferring one that can actually carry a loop when
// `need_channels` asks for it.
const DeviceType* pick_repeater(const ProblemInstance& inst, bool need_channels, int n_min) {
    const DeviceType* best = nullptr;
    const DeviceType* best_any = nullptr;
    for (const DeviceType& t : inst.catalog) {
        if (t.is_processor()) continue;
        if (!best_any || t.cost < best_any->cost) best_any = &t;
        if (t.channels >= n_min && (!best || t.cost < best->cost)) best = &t;
    }
    return need_channels && best ? best : best_any;
}

// Grows one more leaf somewhere inside the processor's subtree: descends from
// the deepest expandable node through cheap repeaters down to leaf level.
bool add_leaf_under(const ProblemInstance& inst, Topology& topo, NodeId proc, int max_nodes) {
    const int S = inst.levels;
    NodeId at = 0;
    int at_level = -1;
    for (NodeId id : subtree(topo, proc)) {
        const TopoNode& n = topo.node(id);
        if (n.level >= S) continue;
        if (static_cast<int>(n.children.size()) >= inst.type(n.type).max_children) continue;
        if (n.level > at_level) {
            at = id;
            at_level = n.level;
        }
    }
    if (at == 0) return false;
    const int n_min = min_signals(inst);
    for (int level = at_level + 1; level <= S; ++level) {
        if (static_cast<int>(topo.size()) >= max_nodes) return false;
        const DeviceType* t = pick_repeater(inst, level == S, n_min);
        if (!t) return false;
        at = topo.add_child(at, t->id);
    }
    return true;
}

const DeviceType* pick_processor(const ProblemInstance& inst, int level, int n_min) {
    const DeviceType* pt = nullptr;
    for (const DeviceType& t : inst.catalog) {
        if (!t.is_processor()) continue;
        if (level == inst.levels && t.channels < n_min) continue;  // leaf must carry loops
        if (!pt || t.cost < pt->cost) pt = &t;
    }
    return pt;
}

// The level a new processor should enter at: the one where its time/memory
// capacity and the channel feed of the leaves below it balance out best
// (deeper wins ties — shorter relay chains, shorter branches).
int best_processor_level(const ProblemInstance& inst, int n_min) {
    const int S = inst.levels;
    const DeviceType* chain_rep = pick_repeater(inst, false, n_min);
    const DeviceType* leaf_rep = pick_repeater(inst, true, n_min);
    int best_level = 0;
    double best_score = -1.0;
    for (int L = 2; L <= S; ++L) {
        const DeviceType* pt = pick_processor(inst, L, n_min);
        if (!pt) continue;
        double feed;
        if (L == S) {
            feed = static_cast<double>(pt->channels / n_min);
        } else {
            if (!leaf_rep) continue;
            double width = pt->max_children;
            for (int l = L + 1; l < S; ++l) {
                if (!chain_rep) { width = 0.0; break; }
                width = std::min(width * chain_rep->max_children, 1e12);
            }
            feed = width * static_cast<double>(leaf_rep->channels / n_min);
        }
        double score =
            std::min(static_cast<double>(processor_capacity(inst, *pt, L)), feed);
        if (score >= best_score) {
            best_score = score;
            best_level = L;
        }
    }
    return best_level;
}

// Grows a new processor branch under a processor-free node with a spare child
// slot: digs through repeater intermediates to the preferred processor level,
// then gives the processor one leaf to begin with.
bool add_processor_branch(const ProblemInstance& inst, Topology& topo, int max_nodes) {
    const int S = inst.levels;
    const int n_min = min_signals(inst);
    const DeviceType* chain_rep = pick_repeater(inst, false, n_min);
    const int preferred = best_processor_level(inst, n_min);

    std::vector<NodeId> spots;
    for (const TopoNode& n : topo.nodes()) {
        if (n.level >= S) continue;
        if (static_cast<int>(n.children.size()) >= inst.type(n.type).max_children) continue;
        bool proc_on_path = false;
        for (NodeId id : root_path(topo, n.id))
            if (inst.type(topo.node(id).type).is_processor()) proc_on_path = true;
        if (!proc_on_path) spots.push_back(n.id);
    }
    // Pack processors under existing intermediates before opening new chains:
    // among spots that can still reach the preferred level, deepest first.
    std::sort(spots.begin(), spots.end(), [&](NodeId a, NodeId b) {
        const int ea = topo.node(a).level + 1;
        const int eb = topo.node(b).level + 1;
        const bool reach_a = ea <= preferred;
        const bool reach_b = eb <= preferred;
        if (reach_a != reach_b) return reach_a;
        if (ea != eb) return reach_a ? ea > eb : ea < eb;
        return a < b;
    });

    for (NodeId v : spots) {
        const int entry = topo.node(v).level + 1;
        const int L = std::max(preferred, entry);
        if (L > S) continue;
        const DeviceType* pt = pick_processor(inst, L, n_min);
        if (!pt) continue;
        if (L > entry && !chain_rep) continue;
        NodeId at = v;
        for (int lvl = entry; lvl < L; ++lvl) {
            if (static_cast<int>(topo.size()) >= max_nodes) return false;
            at = topo.add_child(at, chain_rep->id);
        }
        if (static_cast<int>(topo.size()) >= max_nodes) return false;
        NodeId p = topo.add_child(at, pt->id);
        if (L < S) add_leaf_under(inst, topo, p, max_nodes);
        return true;
    }
    return false;
}

// Deterministic growth until loop placement goes through (or nothing helps):
// feed the processor with the biggest capacity/channel gap another leaf, and
// when every processor is saturated, grow a new processor branch. Keeps the
// trail system supplied with feasible shapes it can learn from.
void repair_capacity(const ProblemInstance& inst, Topology& topo, int max_nodes) {
    if (inst.loops.empty()) return;
    const long long demand = static_cast<long long>(inst.loops.size());
    const int n_min = min_signals(inst);

    for (int round = 0; round < 4 * max_nodes; ++round) {
        if (static_cast<int>(topo.size()) >= max_nodes) return;
        detail::ServiceMap svc = detail::build_service_map(inst, topo);
        const bool placed = detail::place_fast(inst, topo, svc).has_value();

        std::map<NodeId, long long> credit;  // loops reachable through channels
        for (const detail::LeafSlot& slot : svc.leaves)
            if (slot.proc != 0) credit[slot.proc] += slot.channels / n_min;

        long long served = 0;
        struct Hungry {
            long long gap;
            NodeId proc;
        };
        std::vector<Hungry> hungry;
        for (const TopoNode& n : topo.nodes()) {
            if (!inst.type(n.type).is_processor()) continue;
            long long cap = processor_capacity(inst, inst.type(n.type), n.level);
            long long cr = credit.count(n.id) ? credit[n.id] : 0;
            served += std::min(cap, cr);
            if (cap > cr) hungry.push_back({cap - cr, n.id});
        }
        // Even after placement works, top up starved processors: leaf-saturated
        // processors give the placement slack to pack loops onto fewer leaves,
        // and the unused leaves are cheap for the cleanup passes to drop.
        if (placed && hungry.empty()) return;
        if (!placed && served >= demand) return;  // the miss is beyond this repair

        std::sort(hungry.begin(), hungry.end(), [](const Hungry& a, const Hungry& b) {
            if (a.gap != b.gap) return a.gap > b.gap;
            return a.proc < b.proc;
        });
        bool acted = false;
        for (const Hungry& h : hungry)
            if (add_leaf_under(inst, topo, h.proc, max_nodes)) {
                acted = true;
                break;
            }
        if (placed && !acted) return;  // fed everyone we could; do not grow further
        if (!acted) acted = add_processor_branch(inst, topo, max_nodes);
        if (!acted) return;
    }
}

} // namespace

Solution construct_ant(const ProblemInstance& inst, const PheromoneTable& pher,
                       std::mt19937_64& rng, const AcoParams& params) {
    const int S = inst.levels;
    Topology topo;

    // Cost preference is scale-invariant: a device is judged against the mean
    // catalog price, not in absolute units.
    double mean_cost = 0.0;
    for (const DeviceType& t : inst.catalog) mean_cost += t.cost;
    mean_cost /= static_cast<double>(inst.catalog.size());
    if (!(mean_cost > 0.0)) mean_cost = 1.0;
    auto cost_eta = [&](double cost) { return 1.0 / (1.0 + cost / mean_cost); };

    std::vector<int> root_choices;
    std::vector<double> root_w;
    for (const DeviceType& t : inst.catalog) {
        root_choices.push_back(t.id);
        double tr = pher.trail({1, kRootParent, t.id});
        root_w.push_back(std::pow(tr, params.alpha) * std::pow(cost_eta(t.cost), params.beta));
    }
    NodeId root = topo.add_root(root_choices[pick_weighted(rng, root_w)]);

    // Breadth-first expansion, sampling one child slot at a time. A frontier
    // entry remembers whether a processor already sits on its root path, which
    // rules processors out below it.
    std::vector<std::pair<NodeId, bool>> frontier;
    if (S > 1) frontier.emplace_back(root, inst.type(topo.node(root).type).is_processor());
    bool capped = false;
    for (std::size_t qi = 0; qi < frontier.size() && !capped; ++qi) {
        const auto [v, proc_above] = frontier[qi];
        const int v_type = topo.node(v).type;
        const int child_level = topo.node(v).level + 1;
        const int max_children = inst.type(v_type).max_children;

        for (int slot = 0; slot < max_children; ++slot) {
            if (static_cast<int>(topo.size()) >= params.max_nodes) {
                capped = true;
                break;
            }
            std::vector<int> choices;
            std::vector<double> w;
            double min_cost = std::numeric_limits<double>::infinity();
            for (const DeviceType& c : inst.catalog) {
                if (proc_above && c.is_processor()) continue;
                // last chance to give this path its one processor
                if (!proc_above && child_level == S && !c.is_processor()) continue;
                choices.push_back(c.id);
                min_cost = std::min(min_cost, c.cost);
                double tr = pher.trail({child_level, v_type, c.id});
                w.push_back(std::pow(tr, params.alpha) *
                            std::pow(cost_eta(c.cost), params.beta));
            }
            if (slot > 0) {  // stopping with zero children is never legal
                choices.push_back(kStopExpansion);
                double tr = pher.trail({child_level, v_type, kStopExpansion});
                double eta = cost_eta(std::isfinite(min_cost) ? min_cost : 0.0);
                w.push_back(std::pow(tr, params.alpha) * std::pow(eta, params.beta));
            }
            if (choices.empty()) break;
            int chosen = choices[pick_weighted(rng, w)];
            if (chosen == kStopExpansion) break;
            NodeId child = topo.add_child(v, chosen);
            if (child_level < S)
                frontier.emplace_back(child, proc_above || inst.type(chosen).is_processor());
        }
    }

    if (!capped) repair_capacity(inst, topo, params.max_nodes);
    detail::ServiceMap svc = detail::build_service_map(inst, topo);
    std::optional<Placement> placement = detail::place_fast(inst, topo, svc);
    if (!placement) placement = fallback_fill(inst, svc);
    return {std::move(topo), std::move(*placement)};
}

void deposit(const ProblemInstance& inst, PheromoneTable& pher, const Solution& sol,
             const EvaluationReport& report, double q) {
    if (!report.feasible) return;
    const double delta = report.cost > kTol ? q / report.cost : q;
    const Topology& topo = sol.topology;
    for (const TopoNode& n : topo.nodes()) {
        if (!n.parent)
            pher.add({n.level, kRootParent, n.type}, delta);
        else
            pher.add({n.level, topo.node(*n.parent).type, n.type}, delta);
        // a node that kept slots free also made a stop decision
        if (n.level < inst.levels &&
            static_cast<int>(n.children.size()) < inst.type(n.type).max_children)
            pher.add({n.level + 1, n.type, kStopExpansion}, delta);
    }
}

void evaporate(PheromoneTable& pher, double rho) { pher.evaporate(rho); }

namespace {

// A candidate that places every loop but exceeds the failure budget can still
// be saved by pruning: removing nodes only lowers the system failure
// probability.
bool reliability_only(const EvaluationReport& r) {
    if (r.feasible || r.violations.empty()) return false;
    for (const Violation& v : r.violations)
        if (v.constraint != Constraint::Reliability) return false;
    return true;
}

Solution improve_impl(const ProblemInstance& inst, Solution cur, EvaluationReport cur_rep,
                      long long* evals) {
    auto eval = [&](const Solution& s) {
        if (evals) ++*evals;
        return evaluate(inst, s);
    };
    if (!cur_rep.feasible && !reliability_only(cur_rep)) return cur;

    auto better = [&](const EvaluationReport& rep) {
        if (cur_rep.feasible) return rep.feasible && rep.cost < cur_rep.cost - kTol;
        return rep.feasible ||
               (reliability_only(rep) && rep.failure_prob < cur_rep.failure_prob - kTol);
    };

    bool improved = true;
    while (improved) {
        improved = false;

        // Drop subtrees that carry no connected loop (parent keeps a child).
        std::set<NodeId> used;
        for (const auto& [loop, leaf] : cur.placement.connection) used.insert(leaf);
        for (const TopoNode& n : cur.topology.nodes()) {
            if (!n.parent) continue;
            if (cur.topology.node(*n.parent).children.size() < 2) continue;
            std::vector<NodeId> sub = subtree(cur.topology, n.id);
            bool carries = false;
            for (NodeId id : sub)
                if (used.count(id)) carries = true;
            if (carries) continue;

            Solution cand = cur;
            std::sort(sub.begin(), sub.end(), [&](NodeId a, NodeId b) {
                return cand.topology.node(a).level > cand.topology.node(b).level;
            });
            for (NodeId id : sub) cand.topology.remove_childless(id);
            EvaluationReport rep = eval(cand);
            if (better(rep)) {
                cur = std::move(cand);
                cur_rep = rep;
                improved = true;
                break;
            }
        }
        if (improved) continue;
        if (!cur_rep.feasible) break;  // pruning alone could not reach the budget

        // Swap devices for strictly cheaper ones of the same mode.
        for (std::size_t ni = 0; ni < cur.topology.nodes().size() && !improved; ++ni) {
            const TopoNode n = cur.topology.nodes()[ni];
            const DeviceType& t = inst.type(n.type);
            std::vector<int> cheaper;
            for (const DeviceType& c : inst.catalog)
                if (c.mode == t.mode && c.cost < t.cost - kTol) cheaper.push_back(c.id);
            std::sort(cheaper.begin(), cheaper.end(), [&](int x, int y) {
                const DeviceType& a = inst.type(x);
                const DeviceType& b = inst.type(y);
                if (a.cost != b.cost) return a.cost < b.cost;
                return a.id < b.id;
            });
            for (int cid : cheaper) {
                Solution cand = cur;
                cand.topology.set_type(n.id, cid);
                EvaluationReport rep = eval(cand);
                if (rep.feasible) {
                    cur = std::move(cand);
                    cur_rep = rep;
                    improved = true;
                    break;
                }
            }
        }
    }
    return cur;
}

} // namespace

Solution local_improve(const ProblemInstance& inst, const Solution& sol) {
    return improve_impl(inst, sol, evaluate(inst, sol), nullptr);
}

RunResult optimize(const ProblemInstance& inst, const AcoParams& params) {
    inst.validate(nullptr);
    const int ants = std::max(1, params.ants);
    const int iterations = std::max(0, params.iterations);

    PheromoneTable pher(params.tau0);
    RunResult res;
    std::optional<Solution> best;
    std::optional<EvaluationReport> best_rep;
    double q_cur = params.q.value_or(1000.0);
    bool q_frozen = params.q.has_value();
    int stagnation = 0;
    bool reset_done = false;

    for (int iter = 0; iter < iterations; ++iter) {
        std::optional<Solution> iter_best;
        std::optional<EvaluationReport> iter_best_rep;
        bool new_global = false;

        for (int ant = 0; ant < ants; ++ant) {
            std::uint64_t stream = static_cast<std::uint64_t>(iter) * 0x9e3779b97f4a7c15ULL +
                                   static_cast<std::uint64_t>(ant) + 1;
            std::mt19937_64 rng(splitmix64(params.seed ^ splitmix64(stream)));
            Solution sol = construct_ant(inst, pher, rng, params);
            EvaluationReport rep = evaluate(inst, sol);
            ++res.evaluations;
            if (params.local_search && (rep.feasible || reliability_only(rep))) {
                sol = improve_impl(inst, std::move(sol), rep, &res.evaluations);
                rep = evaluate(inst, sol);
                ++res.evaluations;
            }
            if (!rep.feasible) continue;
            if (!iter_best || rep.cost < iter_best_rep->cost - kTol) {
                iter_best = sol;
                iter_best_rep = rep;
            }
            if (!best || rep.cost < best_rep->cost - kTol) {
                best = std::move(sol);
                best_rep = rep;
                new_global = true;
            }
        }

        if (!q_frozen && best) {  // scale deposits to the first cost seen
            q_cur = best_rep->cost;
            q_frozen = true;
        }
        evaporate(pher, params.rho);
        if (iter_best) deposit(inst, pher, *iter_best, *iter_best_rep, q_cur);
        if (best) deposit(inst, pher, *best, *best_rep, q_cur);

        res.history.push_back(best ? std::optional<double>(best_rep->cost) : std::nullopt);
        if (new_global)
            stagnation = 0;
        else if (++stagnation >= 50 && !reset_done) {
            pher.reset();
            reset_done = true;
            stagnation = 0;
        }
    }

    res.best = std::move(best);
    res.best_report = std::move(best_rep);
    return res;
}

} // namespace dcsopt
