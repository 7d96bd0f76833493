#ifndef HYPERBOX_METRIC_HPP
#define HYPERBOX_METRIC_HPP

// Handicap hedging: builds a consistent set of box handicaps for a candidate
// expansion constant L, or returns the cycle that makes L impossible.
//
// A handicap assignment phi is consistent for L when every edge (u, v)
// satisfies phi[v] >= L * phi[u] / lambda[u], with the right-hand side
// rounded up. Such an assignment exists iff every cycle has average
// multiplier at least L.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hyperbox/digraph.hpp"
#include "hyperbox/errors.hpp"
#include "hyperbox/interval.hpp"

namespace hyperbox {

// Directed graph with a multiplier lower bound on every vertex. This is the
// only view of a box model the metric code needs.
struct MultiplierGraph {
    Digraph graph;
    std::vector<double> lambda;

    std::size_t size() const { return graph.size(); }
};

struct HandicapStats {
    double min = 0.0;
    double avg = 0.0;
    double max = 0.0;
};

struct BoxMetric {
    std::vector<double> phi;
    double L = 0.0;

    // Statistics of phi / max(phi), the normalization used for reporting.
    HandicapStats normalized_stats() const {
        HandicapStats s;
        if (phi.empty()) return s;
        const double top = *std::max_element(phi.begin(), phi.end());
        s.min = *std::min_element(phi.begin(), phi.end()) / top;
        s.max = 1.0;
        s.avg = std::accumulate(phi.begin(), phi.end(), 0.0) / top / static_cast<double>(phi.size());
        return s;
    }
};

struct CycleReport {
    std::vector<VertexIndex> vertices;  // v0 -> v1 -> ... -> v_{n-1} -> v0
    double avg_multiplier = 0.0;        // rounded down

    std::size_t length() const { return vertices.size(); }
};

// Downward-rounded (prod lambda)^(1/n) along a cycle.
inline double average_multiplier_lower(std::span<const double> lambda, std::span<const VertexIndex> cycle) {
    if (cycle.empty()) return 0.0;
    Interval product = Interval::point(1.0);
    for (VertexIndex v : cycle) product = product * Interval::point(lambda[v]);
    return nth_root_lower(product, static_cast<unsigned>(cycle.size()));
}

// Smallest handicap the head of an edge out of u may carry:
// sup(Hull(L) * Hull(phi_u) / Hull(lambda_u)).
inline double required_handicap(double L, double phi_u, double lambda_u) {
    return rounding::div_up(rounding::mul_up(L, phi_u), lambda_u);
}

inline constexpr double kHandicapFloor = 1e-280;
inline constexpr double kHandicapCeiling = 1e280;

struct MetricOptions {
    // Root choice inside each strongly connected component: lowest index by
    // default, otherwise a deterministic pseudo-random member.
    std::optional<std::uint64_t> root_seed;
};

struct BuildSuccess {
    BoxMetric metric;
};

struct BuildFailure {
    CycleReport cycle;
};

using BuildResult = std::variant<BuildSuccess, BuildFailure>;

namespace detail {

inline void check_range(double phi) {
    if (!(phi >= kHandicapFloor)) throw HandicapRangeError("handicap underflow");
    if (!(phi <= kHandicapCeiling)) throw HandicapRangeError("handicap overflow");
}

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Shortest cycle through v inside the subgraph `allowed`, by BFS.
inline std::vector<VertexIndex> cycle_through(const Digraph& g, VertexIndex v, const std::vector<bool>& allowed) {
    std::vector<std::int64_t> parent(g.size(), -1);
    std::deque<VertexIndex> queue{v};
    std::vector<bool> seen(g.size(), false);
    while (!queue.empty()) {
        const VertexIndex u = queue.front();
        queue.pop_front();
        for (VertexIndex w : g.successors(u)) {
            if (!allowed[w]) continue;
            if (w == v) {
                std::vector<VertexIndex> cyc{u};
                while (cyc.back() != v) cyc.push_back(static_cast<VertexIndex>(parent[cyc.back()]));
                std::reverse(cyc.begin(), cyc.end());
                return cyc;
            }
            if (!seen[w]) {
                seen[w] = true;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    return {};
}

// Rotate a cyclic vertex list so that its smallest vertex comes first.
inline void canonical_rotation(std::vector<VertexIndex>& cyc) {
    std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
}

struct HedgeWorkspace {
    explicit HedgeWorkspace(const Digraph& g)
        : reached(g.size(), false), tree_parent(g.size(), 0), base(g.size() + 1, 0), on_path(g.size(), false) {
        for (VertexIndex v = 0; v < g.size(); ++v) base[v + 1] = base[v] + g.successors(v).size();
        active.assign(base.back(), false);
    }

    std::vector<bool> reached;
    std::vector<VertexIndex> tree_parent;
    // Edge slots are addressed by base[vertex] + position in its successor
    // list; active marks edges already in the current exhaustion step.
    std::vector<std::size_t> base;
    std::vector<bool> active;
    std::vector<bool> on_path;
};

// Handicap hedging restricted to one strongly connected component.
// Returns the obstruction cycle on failure; phi is filled on success.
inline std::optional<CycleReport> hedge_component(const MultiplierGraph& mg, double L,
                                                  const std::vector<VertexIndex>& members,
                                                  const std::vector<bool>& in_comp, VertexIndex root,
                                                  std::vector<double>& phi, HedgeWorkspace& ws) {
    const Digraph& g = mg.graph;
    const auto& lambda = mg.lambda;
    auto& active = ws.active;
    auto& on_path = ws.on_path;
    const auto& base = ws.base;

    // Arborescence by breadth-first search; tree edges are the first step of
    // the edge exhaustion.
    std::deque<VertexIndex> queue{root};
    ws.reached[root] = true;
    phi[root] = 1.0;
    while (!queue.empty()) {
        const VertexIndex v = queue.front();
        queue.pop_front();
        for (VertexIndex w : g.successors(v)) {
            if (!in_comp[w] || ws.reached[w]) continue;
            ws.reached[w] = true;
            ws.tree_parent[w] = v;
            phi[w] = required_handicap(L, phi[v], lambda[v]);
            check_range(phi[w]);
            queue.push_back(w);
        }
    }
    for (VertexIndex v : members) {
        if (v == root) continue;
        const VertexIndex p = ws.tree_parent[v];
        const auto s = g.successors(p);
        const auto pos = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), v) - s.begin());
        active[base[p] + pos] = true;
    }

    // Depth-first hedging with an explicit stack. on_path marks the current
    // hedge chain (the recursion stack of the textbook formulation).
    struct Frame {
        VertexIndex v;
        std::size_t next;
    };
    std::vector<Frame> stack;

    auto obstruction = [&](VertexIndex back_to) {
        // Chain from back_to to the top of the stack, closed by the edge back.
        CycleReport rep;
        auto it = std::find_if(stack.begin(), stack.end(), [&](const Frame& f) { return f.v == back_to; });
        for (; it != stack.end(); ++it) rep.vertices.push_back(it->v);
        rep.avg_multiplier = average_multiplier_lower(lambda, rep.vertices);
        for (const auto& f : stack) on_path[f.v] = false;
        return rep;
    };

    for (VertexIndex a : members) {
        const auto succ = g.successors(a);
        for (std::size_t k = 0; k < succ.size(); ++k) {
            const VertexIndex b = succ[k];
            if (!in_comp[b] || active[base[a] + k]) continue;
            active[base[a] + k] = true;

            // Hedge(a, b, a): a is pinned for the duration.
            if (phi[b] >= required_handicap(L, phi[a], lambda[a])) continue;
            if (b == a) {
                CycleReport rep{{a}, 0.0};
                rep.avg_multiplier = average_multiplier_lower(lambda, rep.vertices);
                return rep;
            }
            stack.clear();
            stack.push_back({a, 0});
            on_path[a] = true;
            phi[b] = required_handicap(L, phi[a], lambda[a]);
            check_range(phi[b]);
            stack.push_back({b, 0});
            on_path[b] = true;
            while (stack.size() > 1) {
                Frame& fr = stack.back();
                const VertexIndex v = fr.v;
                const auto vs = g.successors(v);
                bool descended = false;
                while (fr.next < vs.size()) {
                    const std::size_t pos = fr.next++;
                    const VertexIndex w = vs[pos];
                    if (!active[base[v] + pos]) continue;
                    const double need = required_handicap(L, phi[v], lambda[v]);
                    if (phi[w] >= need) continue;
                    // Raising a vertex already on the chain would loop forever:
                    // either w is the pinned source a, or rounding made a
                    // previously consistent cycle non-contracting.
                    if (on_path[w]) return obstruction(w);
                    phi[w] = need;
                    check_range(phi[w]);
                    stack.push_back({w, 0});
                    on_path[w] = true;
                    descended = true;
                    break;
                }
                if (!descended) {
                    on_path[stack.back().v] = false;
                    stack.pop_back();
                }
            }
            on_path[a] = false;
        }
    }
    return std::nullopt;
}

} // namespace detail

// Scale a vector of handicaps by 2^k; exact, so consistency is preserved.
inline void scale_by_power_of_two(std::vector<double>& phi, std::span<const VertexIndex> which, int k) {
    for (VertexIndex v : which) phi[v] = std::ldexp(phi[v], k);
}

// Attempts to certify expansion by L. On failure the returned cycle has
// downward-rounded average multiplier below (or, under rounding ties, equal
// to) L.
inline BuildResult build_metric(const MultiplierGraph& mg, double L, const MetricOptions& opts = {}) {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("expansion constant must be positive and finite");
    if (mg.lambda.size() != mg.graph.size()) throw DimensionMismatch("multiplier count does not match vertex count");
    const Digraph& g = mg.graph;
    const Components comps = strongly_connected_components(g);

    // A vertex with zero multiplier and an out-edge can never be consistent.
    for (VertexIndex v = 0; v < g.size(); ++v) {
        if (mg.lambda[v] > 0.0 || g.successors(v).empty()) continue;
        std::vector<bool> allowed(g.size(), false);
        for (VertexIndex w : comps.members[comps.of[v]]) allowed[w] = true;
        auto cyc = detail::cycle_through(g, v, allowed);
        if (cyc.empty()) cyc = {v};
        detail::canonical_rotation(cyc);
        return BuildFailure{{std::move(cyc), 0.0}};
    }

    // Cross-component edges grouped by the component they enter.
    std::vector<std::vector<std::pair<VertexIndex, VertexIndex>>> incoming(comps.count());
    for (VertexIndex u = 0; u < g.size(); ++u) {
        for (VertexIndex v : g.successors(u)) {
            if (comps.of[u] != comps.of[v]) incoming[comps.of[v]].emplace_back(u, v);
        }
    }

    std::vector<double> phi(g.size(), 1.0);
    std::vector<bool> in_comp(g.size(), false);
    detail::HedgeWorkspace ws(g);
    // Tarjan ids are reverse topological; walking them downwards finishes
    // every component before any component downstream of it.
    for (std::size_t c = comps.count(); c-- > 0;) {
        const auto& members = comps.members[c];
        for (VertexIndex v : members) in_comp[v] = true;
        VertexIndex root = members.front();
        if (opts.root_seed) root = members[detail::splitmix(*opts.root_seed ^ c) % members.size()];
        auto failure = detail::hedge_component(mg, L, members, in_comp, root, phi, ws);
        for (VertexIndex v : members) in_comp[v] = false;
        if (failure) {
            detail::canonical_rotation(failure->vertices);
            return BuildFailure{std::move(*failure)};
        }

        // Lift the whole component by a power of two (exact, so internal
        // consistency survives) until every entering edge is satisfied.
        for (;;) {
            double worst = 1.0;
            for (auto [u, v] : incoming[c]) {
                const double need = required_handicap(L, phi[u], mg.lambda[u]);
                if (phi[v] < need) worst = std::max(worst, need / phi[v]);
            }
            if (worst <= 1.0) break;
            const int k = std::max(1, static_cast<int>(std::ceil(std::log2(worst))));
            scale_by_power_of_two(phi, members, k);
            for (VertexIndex v : members) detail::check_range(phi[v]);
        }
    }
    return BuildSuccess{{std::move(phi), L}};
}

// Independent replay of the consistency inequality on every edge.
inline bool verify_metric(const MultiplierGraph& mg, const BoxMetric& metric) {
    if (metric.phi.size() != mg.size() || mg.lambda.size() != mg.size()) {
        throw DimensionMismatch("handicap count does not match vertex count");
    }
    if (!(metric.L > 0.0) || !std::isfinite(metric.L)) return false;
    const Interval L = Interval::point(metric.L);
    for (VertexIndex u = 0; u < mg.size(); ++u) {
        const double phi_u = metric.phi[u];
        if (!(phi_u > 0.0) || !std::isfinite(phi_u)) return false;
        if (mg.graph.successors(u).empty()) continue;
        if (!(mg.lambda[u] > 0.0)) return false;
        const Interval rhs = L * Interval::point(phi_u) / Interval::point(mg.lambda[u]);
        for (VertexIndex v : mg.graph.successors(u)) {
            if (!(metric.phi[v] >= rhs.hi())) return false;
        }
    }
    return true;
}

struct FindLOptions {
    double step = 0.01;
    std::optional<double> L_hi;  // defaults to the caller-supplied degree
    std::size_t max_trials = 0;  // 0: ceil((L_hi - 1) / step) + 2
    double floor = 1.0;          // stop once a failing cycle averages <= floor
    MetricOptions metric;
};

struct Trial {
    double L = 0.0;
    bool success = false;
    std::optional<CycleReport> cycle;
};

struct FindLResult {
    bool expansive = false;
    std::optional<BoxMetric> metric;     // set when expansive
    std::optional<CycleReport> cycle;    // weakest failing cycle seen last
    std::vector<Trial> trials;
};

// Expansion-constant search driven by failing cycles: after a failure at L
// with cycle average L', retry at min(L', L - step). Stops with
// expansive = false as soon as a failing cycle averages <= opts.floor.
inline FindLResult find_L(const MultiplierGraph& mg, double L_hi, const FindLOptions& opts = {}) {
    if (!(opts.step > 0.0)) throw DomainError("L step must be positive");
    if (!(L_hi >= 1.0)) throw DomainError("L_hi must be at least 1");
    const std::size_t budget =
        opts.max_trials ? opts.max_trials : static_cast<std::size_t>(std::ceil((L_hi - 1.0) / opts.step)) + 2;
    FindLResult out;
    double L = L_hi;
    for (std::size_t trial = 0; trial < budget; ++trial) {
        auto res = build_metric(mg, L, opts.metric);
        if (auto* ok = std::get_if<BuildSuccess>(&res)) {
            out.trials.push_back({L, true, std::nullopt});
            if (L > 1.0) {
                out.expansive = true;
                out.metric = std::move(ok->metric);
            }
            return out;
        }
        auto& cyc = std::get<BuildFailure>(res).cycle;
        out.trials.push_back({L, false, cyc});
        out.cycle = cyc;
        const double Lp = cyc.avg_multiplier;
        if (Lp <= std::max(1.0, opts.floor)) return out;
        // Rounded up so that a step never exceeds the requested one.
        double next = std::min(Lp, rounding::sub_up(L, opts.step));
        if (next <= 1.0) next = Lp < L ? Lp : rounding::next_down(L);
        if (next <= 1.0) return out;
        L = next;
    }
    return out;
}

} // namespace hyperbox

#endif
