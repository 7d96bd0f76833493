#ifndef HYPERBOX_DIGRAPH_HPP
#define HYPERBOX_DIGRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hyperbox/errors.hpp"

namespace hyperbox {

using VertexIndex = std::uint32_t;

// Compressed adjacency (CSR). Successor lists are kept sorted.
class Digraph {
public:
    Digraph() : offsets_{0} {}

    explicit Digraph(const std::vector<std::vector<VertexIndex>>& adjacency) : offsets_{0} {
        for (const auto& row : adjacency) {
            std::vector<VertexIndex> sorted = row;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            targets_.insert(targets_.end(), sorted.begin(), sorted.end());
            offsets_.push_back(targets_.size());
        }
        for (VertexIndex t : targets_) {
            if (t >= size()) throw DimensionMismatch("edge target out of range");
        }
    }

    static Digraph from_edges(std::size_t n, const std::vector<std::pair<VertexIndex, VertexIndex>>& edges) {
        std::vector<std::vector<VertexIndex>> adj(n);
        for (auto [u, v] : edges) adj.at(u).push_back(v);
        return Digraph(adj);
    }

    std::size_t size() const { return offsets_.size() - 1; }
    std::size_t edge_count() const { return targets_.size(); }

    std::span<const VertexIndex> successors(VertexIndex v) const {
        return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
    }

    bool has_edge(VertexIndex u, VertexIndex v) const {
        const auto s = successors(u);
        return std::binary_search(s.begin(), s.end(), v);
    }

    Digraph reversed() const {
        std::vector<std::vector<VertexIndex>> adj(size());
        for (VertexIndex u = 0; u < size(); ++u) {
            for (VertexIndex v : successors(u)) adj[v].push_back(u);
        }
        return Digraph(adj);
    }

    std::vector<std::size_t> in_degrees() const {
        std::vector<std::size_t> d(size(), 0);
        for (VertexIndex t : targets_) ++d[t];
        return d;
    }

    friend bool operator==(const Digraph&, const Digraph&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<VertexIndex> targets_;
};

// Strongly connected components. Component ids follow Tarjan completion
// order, which is a reverse topological order of the condensation.
struct Components {
    std::vector<std::uint32_t> of;  // vertex -> component
    std::vector<std::vector<VertexIndex>> members;  // sorted
    std::vector<bool> nontrivial;  // size > 1 or carries a self-loop

    std::size_t count() const { return members.size(); }
};

inline Components strongly_connected_components(const Digraph& g) {
    const auto n = static_cast<VertexIndex>(g.size());
    constexpr std::uint32_t kUnset = UINT32_MAX;
    std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<VertexIndex> stack;
    Components out;
    out.of.assign(n, kUnset);
    std::uint32_t counter = 0;

    struct Frame {
        VertexIndex v;
        std::size_t next;
    };
    std::vector<Frame> call;
    for (VertexIndex root = 0; root < n; ++root) {
        if (index[root] != kUnset) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& fr = call.back();
            const auto succ = g.successors(fr.v);
            if (fr.next < succ.size()) {
                const VertexIndex w = succ[fr.next++];
                if (index[w] == kUnset) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[fr.v] = std::min(low[fr.v], index[w]);
                }
                continue;
            }
            const VertexIndex v = fr.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                const auto id = static_cast<std::uint32_t>(out.members.size());
                std::vector<VertexIndex> comp;
                VertexIndex w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    out.of[w] = id;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                const bool big = comp.size() > 1 || g.has_edge(comp[0], comp[0]);
                out.members.push_back(std::move(comp));
                out.nontrivial.push_back(big);
            }
        }
    }
    return out;
}

} // namespace hyperbox

#endif
