#ifndef HYPERBOX_ORACLE_HPP
#define HYPERBOX_ORACLE_HPP

// Floating-point cycle oracles over log-multipliers. These are advisory
// cross-checks for the certified search and never enter a certificate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "hyperbox/digraph.hpp"
#include "hyperbox/errors.hpp"
#include "hyperbox/metric.hpp"

namespace hyperbox {

struct CycleValue {
    double value = std::numeric_limits<double>::infinity();
    std::vector<VertexIndex> cycle;
    // False when the value is only an upper bound (minimum cycle product on
    // large graphs with a contracting cycle).
    bool exact = true;
};

namespace detail {

inline void require_positive(const MultiplierGraph& mg) {
    for (VertexIndex v = 0; v < mg.size(); ++v) {
        if (!mg.graph.successors(v).empty() && !(mg.lambda[v] > 0.0)) {
            throw ZeroMultiplier("vertex " + std::to_string(v) + " has zero multiplier");
        }
    }
}

inline double cycle_product(const MultiplierGraph& mg, const std::vector<VertexIndex>& cyc) {
    double p = 1.0;
    for (VertexIndex v : cyc) p *= mg.lambda[v];
    return p;
}

// Howard policy iteration for the minimum mean cycle of one strongly
// connected component, edge weight w(u, v) = ln lambda[u].
inline CycleValue howard_component(const MultiplierGraph& mg, const std::vector<VertexIndex>& members,
                                   const std::vector<std::uint32_t>& comp_of, std::uint32_t comp) {
    const Digraph& g = mg.graph;
    const std::size_t n = g.size();
    std::vector<double> weight(n, 0.0);
    for (VertexIndex v : members) weight[v] = std::log(mg.lambda[v]);

    std::vector<VertexIndex> policy(n, 0);
    for (VertexIndex v : members) {
        for (VertexIndex w : g.successors(v)) {
            if (comp_of[w] == comp) {
                policy[v] = w;
                break;
            }
        }
    }
    std::vector<double> eta(n, 0.0), x(n, 0.0);
    constexpr double kEps = 1e-13;
    std::vector<int> mark(n, -1);
    std::vector<std::vector<VertexIndex>> rev(n);

    for (int iter = 0; iter < 100000; ++iter) {
        // Evaluate: every vertex of the functional graph reaches one cycle.
        for (VertexIndex v : members) {
            mark[v] = -1;
            rev[v].clear();
        }
        for (VertexIndex v : members) rev[policy[v]].push_back(v);
        int stamp = 0;
        for (VertexIndex s : members) {
            if (mark[s] != -1) continue;
            VertexIndex v = s;
            const int my = stamp++;
            while (mark[v] == -1) {
                mark[v] = my;
                v = policy[v];
            }
            if (mark[v] != my) continue;  // reached an already-evaluated tree
            // v lies on a new cycle.
            double sum = 0.0;
            std::size_t len = 0;
            VertexIndex u = v;
            do {
                sum += weight[u];
                ++len;
                u = policy[u];
            } while (u != v);
            const double mean = sum / static_cast<double>(len);
            // Reverse BFS from the handle v assigns eta and x.
            std::vector<VertexIndex> queue{v};
            eta[v] = mean;
            x[v] = 0.0;
            for (std::size_t h = 0; h < queue.size(); ++h) {
                const VertexIndex y = queue[h];
                for (VertexIndex p : rev[y]) {
                    if (p == v) continue;
                    eta[p] = mean;
                    x[p] = weight[p] - mean + x[y];
                    mark[p] = -2 - static_cast<int>(v);
                    queue.push_back(p);
                }
            }
            mark[v] = -2 - static_cast<int>(v);
        }
        // Improve.
        bool changed = false;
        for (VertexIndex u : members) {
            double best_eta = eta[u];
            VertexIndex best = policy[u];
            for (VertexIndex w : g.successors(u)) {
                if (comp_of[w] != comp) continue;
                if (eta[w] < best_eta - kEps) {
                    best_eta = eta[w];
                    best = w;
                }
            }
            if (best != policy[u]) {
                policy[u] = best;
                changed = true;
            }
        }
        if (!changed) {
            for (VertexIndex u : members) {
                for (VertexIndex w : g.successors(u)) {
                    if (comp_of[w] != comp || std::fabs(eta[w] - eta[u]) > kEps) continue;
                    const double val = weight[u] - eta[u] + x[w];
                    if (val < x[u] - kEps * (1.0 + std::fabs(x[u]))) {
                        x[u] = val;
                        policy[u] = w;
                        changed = true;
                    }
                }
            }
        }
        if (!changed) break;
    }
    // Read off the minimum policy cycle.
    VertexIndex start = members.front();
    for (VertexIndex v : members) {
        if (eta[v] < eta[start]) start = v;
    }
    std::vector<bool> seen(n, false);
    VertexIndex v = start;
    while (!seen[v]) {
        seen[v] = true;
        v = policy[v];
    }
    CycleValue out;
    VertexIndex u = v;
    do {
        out.cycle.push_back(u);
        u = policy[u];
    } while (u != v);
    std::rotate(out.cycle.begin(), std::min_element(out.cycle.begin(), out.cycle.end()), out.cycle.end());
    out.value = std::pow(cycle_product(mg, out.cycle), 1.0 / static_cast<double>(out.cycle.size()));
    return out;
}

} // namespace detail

// Minimum over all cycles of the average multiplier (prod lambda)^(1/n).
// Equivalently the minimum mean cycle of ln lambda, attained on a simple
// cycle. Returns value = +inf for an acyclic graph.
inline CycleValue min_cycle_mean(const MultiplierGraph& mg) {
    detail::require_positive(mg);
    const Components comps = strongly_connected_components(mg.graph);
    CycleValue best;
    for (std::uint32_t c = 0; c < comps.count(); ++c) {
        if (!comps.nontrivial[c]) continue;
        auto cand = detail::howard_component(mg, comps.members[c], comps.of, c);
        if (cand.value < best.value) best = std::move(cand);
    }
    return best;
}

namespace detail {

// Exhaustive minimum-product simple cycle, each cycle rooted at its smallest
// vertex. Exponential; only for small graphs.
inline CycleValue exhaustive_min_product(const MultiplierGraph& mg) {
    const Digraph& g = mg.graph;
    const auto n = static_cast<VertexIndex>(g.size());
    CycleValue best;
    std::vector<VertexIndex> path;
    std::vector<bool> used(n, false);
    std::function<void(VertexIndex, VertexIndex, double)> dfs = [&](VertexIndex root, VertexIndex v, double acc) {
        for (VertexIndex w : g.successors(v)) {
            if (w == root) {
                if (acc < best.value) {
                    best.value = acc;
                    best.cycle = path;
                }
            } else if (w > root && !used[w]) {
                used[w] = true;
                path.push_back(w);
                dfs(root, w, acc + std::log(mg.lambda[w]));
                path.pop_back();
                used[w] = false;
            }
        }
    };
    for (VertexIndex r = 0; r < n; ++r) {
        used[r] = true;
        path = {r};
        dfs(r, r, std::log(mg.lambda[r]));
        used[r] = false;
    }
    if (!best.cycle.empty()) best.value = cycle_product(mg, best.cycle);
    return best;
}

} // namespace detail

// Minimum over simple cycles of prod lambda. Exact via shortest paths when no
// cycle contracts (product < 1); otherwise exact by exhaustive search on
// graphs up to exhaustive_limit vertices, else a contracting witness with
// exact = false.
inline CycleValue min_cycle_multiplier(const MultiplierGraph& mg, std::size_t exhaustive_limit = 20) {
    detail::require_positive(mg);
    const Digraph& g = mg.graph;
    const auto n = static_cast<VertexIndex>(g.size());
    std::vector<double> w(n, 0.0);
    for (VertexIndex v = 0; v < n; ++v) w[v] = std::log(mg.lambda[v]);

    // Bellman-Ford from a virtual source connected to every vertex.
    std::vector<double> h(n, 0.0);
    std::vector<std::int64_t> pred(n, -1);
    std::int64_t relaxed_last = -1;
    for (VertexIndex round = 0; round <= n; ++round) {
        relaxed_last = -1;
        for (VertexIndex u = 0; u < n; ++u) {
            for (VertexIndex v : g.successors(u)) {
                if (h[u] + w[u] < h[v] - 1e-15 * (1.0 + std::fabs(h[v]))) {
                    h[v] = h[u] + w[u];
                    pred[v] = u;
                    relaxed_last = v;
                }
            }
        }
        if (relaxed_last < 0) break;
    }
    if (relaxed_last >= 0) {
        if (n <= exhaustive_limit) return detail::exhaustive_min_product(mg);
        auto v = static_cast<VertexIndex>(relaxed_last);
        for (VertexIndex k = 0; k < n; ++k) v = static_cast<VertexIndex>(pred[v]);
        CycleValue out;
        VertexIndex u = v;
        do {
            out.cycle.push_back(u);
            u = static_cast<VertexIndex>(pred[u]);
        } while (u != v);
        std::reverse(out.cycle.begin(), out.cycle.end());
        out.value = detail::cycle_product(mg, out.cycle);
        out.exact = false;
        return out;
    }

    // No contracting cycle: Dijkstra with potentials from every source.
    CycleValue best;
    std::vector<double> dist(n);
    std::vector<std::int64_t> par(n);
    using Item = std::pair<double, VertexIndex>;
    for (VertexIndex s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(par.begin(), par.end(), -1);
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[s] = 0.0;
        pq.push({0.0, s});
        double best_here = std::numeric_limits<double>::infinity();
        VertexIndex close_from = s;
        while (!pq.empty()) {
            auto [d, u] = pq.top();
            pq.pop();
            if (d > dist[u]) continue;
            for (VertexIndex v : g.successors(u)) {
                const double rw = std::max(0.0, w[u] + h[u] - h[v]);
                if (v == s) {
                    if (d + rw < best_here) {
                        best_here = d + rw;
                        close_from = u;
                    }
                    continue;
                }
                if (d + rw < dist[v]) {
                    dist[v] = d + rw;
                    par[v] = u;
                    pq.push({dist[v], v});
                }
            }
        }
        if (!std::isfinite(best_here)) continue;
        std::vector<VertexIndex> cyc;
        for (std::int64_t u = close_from; u != -1; u = par[static_cast<VertexIndex>(u)]) {
            cyc.push_back(static_cast<VertexIndex>(u));
            if (static_cast<VertexIndex>(u) == s) break;
        }
        std::reverse(cyc.begin(), cyc.end());
        const double prod = detail::cycle_product(mg, cyc);
        if (prod < best.value) {
            best.value = prod;
            best.cycle = std::move(cyc);
        }
    }
    return best;
}

} // namespace hyperbox

#endif
