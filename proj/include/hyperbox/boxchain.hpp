#ifndef HYPERBOX_BOXCHAIN_HPP
#define HYPERBOX_BOXCHAIN_HPP

// Box chain models: quadtree boxes covering the Julia set, with an edge
// (k, j) whenever the image of box k may come within delta (sup norm) of
// box j.
//
// Pruning removes only boxes provably disjoint from J:
//   * boxes whose image escapes the region;
//   * boxes with no predecessor (J is backward invariant);
//   * boxes not on any cycle (J is chain transitive);
//   * "trapped" boxes, which cannot reach any box whose inflated image
//     leaves the current cover. The union W of trapped boxes satisfies
//     f(W) in int(W), so iterates are bounded on int(W) and W misses J.
//     This is what removes attracting basins.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <deque>
#include <thread>
#include <utility>
#include <vector>

#include "hyperbox/digraph.hpp"
#include "hyperbox/dynamics.hpp"
#include "hyperbox/errors.hpp"
#include "hyperbox/interval.hpp"
#include "hyperbox/metric.hpp"

namespace hyperbox {

inline constexpr int kMaxBoxDepth = 28;

// Closed box of side 2*half/2^depth at grid position (i, j); i runs along
// the real axis, j along the imaginary axis.
struct BoxId {
    std::uint32_t depth = 0;
    std::uint32_t i = 0;
    std::uint32_t j = 0;

    friend auto operator<=>(const BoxId&, const BoxId&) = default;

    BoxId child(unsigned quadrant) const { return {depth + 1, 2 * i + (quadrant & 1u), 2 * j + (quadrant >> 1u)}; }
    BoxId parent() const { return {depth - 1, i / 2, j / 2}; }

    bool is_ancestor_of(const BoxId& o) const {
        if (o.depth <= depth) return false;
        const auto shift = o.depth - depth;
        return (o.i >> shift) == i && (o.j >> shift) == j;
    }
};

inline double box_side(double half, std::uint32_t depth) { return std::ldexp(2.0 * half, -static_cast<int>(depth)); }

// Exact: all coordinates are dyadic.
inline ComplexBox box_geometry(const BoxId& id, double half) {
    const double s = box_side(half, id.depth);
    const double x0 = -half + s * id.i;
    const double y0 = -half + s * id.j;
    return {Interval(x0, x0 + s), Interval(y0, y0 + s)};
}

// Point-location structure over a set of boxes with disjoint interiors.
class BoxQuadtree {
public:
    BoxQuadtree(double half, const std::vector<BoxId>& boxes) : half_(half) {
        nodes_.push_back({});
        for (std::size_t v = 0; v < boxes.size(); ++v) insert(boxes[v], static_cast<std::int32_t>(v));
    }

    double half() const { return half_; }

    // Calls hit(vertex) for each box meeting the closed rectangle; returns
    // true when the rectangle lies entirely inside the union of boxes.
    template <class Hit>
    bool query(const ComplexBox& rect, Hit&& hit) const {
        bool covered = rect.re.lo() >= -half_ && rect.re.hi() <= half_ && rect.im.lo() >= -half_ &&
                       rect.im.hi() <= half_;
        struct Item {
            std::int32_t node;
            BoxId id;
        };
        std::vector<Item> stack{{0, {0, 0, 0}}};
        while (!stack.empty()) {
            const Item it = stack.back();
            stack.pop_back();
            if (!box_geometry(it.id, half_).intersects(rect)) continue;
            const Node& n = nodes_[static_cast<std::size_t>(it.node)];
            if (n.vertex >= 0) {
                hit(static_cast<VertexIndex>(n.vertex));
            } else if (n.child >= 0) {
                for (unsigned q = 0; q < 4; ++q) stack.push_back({n.child + static_cast<std::int32_t>(q), it.id.child(q)});
            } else {
                covered = false;
            }
        }
        return covered;
    }

    // Vertex whose box contains z, or -1. Boundary points resolve to one
    // of the adjacent boxes.
    std::int64_t locate(std::complex<double> z) const {
        if (!(std::fabs(z.real()) <= half_ && std::fabs(z.imag()) <= half_)) return -1;
        std::int64_t found = -1;
        query(ComplexBox::point(z), [&](VertexIndex v) {
            if (found < 0) found = v;
        });
        return found;
    }

private:
    struct Node {
        std::int32_t child = -1;
        std::int32_t vertex = -1;
    };

    void insert(const BoxId& id, std::int32_t vertex) {
        if (static_cast<int>(id.depth) > kMaxBoxDepth) throw DepthLimitExceeded("box depth exceeds supported maximum");
        if (id.i >> id.depth || id.j >> id.depth) throw DomainError("box index outside grid");
        std::size_t node = 0;
        for (std::uint32_t level = 0; level < id.depth; ++level) {
            if (nodes_[node].vertex >= 0) throw DomainError("overlapping boxes in model");
            if (nodes_[node].child < 0) {
                nodes_[node].child = static_cast<std::int32_t>(nodes_.size());
                nodes_.resize(nodes_.size() + 4);
            }
            const auto shift = id.depth - level - 1;
            const unsigned q = ((id.i >> shift) & 1u) | (((id.j >> shift) & 1u) << 1u);
            node = static_cast<std::size_t>(nodes_[node].child) + q;
        }
        if (nodes_[node].vertex >= 0 || nodes_[node].child >= 0) throw DomainError("overlapping boxes in model");
        nodes_[node].vertex = vertex;
    }

    double half_;
    std::vector<Node> nodes_;
};

struct BoxGraph {
    PolynomialMap map;
    DynamicalBounds bounds;
    double delta = 0.0;
    std::vector<BoxId> boxes;       // canonical (sorted) order
    std::vector<double> lambda;     // multiplier lower bound per box
    Digraph edges;
    std::vector<bool> exits;        // inflated image not inside the cover
    bool has_edges = false;

    std::size_t size() const { return boxes.size(); }
    ComplexBox geometry(VertexIndex v) const { return box_geometry(boxes[v], bounds.half); }
    std::uint32_t max_depth() const {
        std::uint32_t d = 0;
        for (const auto& b : boxes) d = std::max(d, b.depth);
        return d;
    }

    MultiplierGraph multiplier_graph() const { return {edges, lambda}; }
};

// delta = (finest box side) * 2^-20.
inline double default_delta(double half, std::uint32_t finest_depth) {
    return std::ldexp(box_side(half, finest_depth), -20);
}

inline BoxGraph initial_grid(const PolynomialMap& map, std::uint32_t depth) {
    if (static_cast<int>(depth) > kMaxBoxDepth) throw DepthLimitExceeded("grid depth too large");
    BoxGraph g{map, dynamical_bounds(map), 0.0, {}, {}, {}, {}, false};
    const std::uint32_t n = 1u << depth;
    g.boxes.reserve(static_cast<std::size_t>(n) * n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) g.boxes.push_back({depth, i, j});
    }
    g.delta = default_delta(g.bounds.half, depth);
    g.lambda.assign(g.boxes.size(), 0.0);
    g.exits.assign(g.boxes.size(), false);
    g.edges = Digraph(std::vector<std::vector<VertexIndex>>(g.boxes.size()));
    return g;
}

struct VertexImage {
    double lambda = 0.0;
    bool exits = false;
    std::vector<VertexIndex> targets;
};

// Rigorous image data for one box against a cover.
inline VertexImage image_of(const PolynomialMap& map, const BoxQuadtree& cover, const ComplexBox& box, double delta) {
    VertexImage out;
    out.lambda = multiplier_lower(map, box);
    const ComplexBox img = map.eval(box);
    if (!img.bounded()) {
        out.exits = true;
        return out;
    }
    out.exits = !cover.query(inflate(img, delta), [&](VertexIndex v) { out.targets.push_back(v); });
    std::sort(out.targets.begin(), out.targets.end());
    return out;
}

inline unsigned worker_count(std::size_t work) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, work / 4096)));
}

// Computes lambda, exits and all edges for every vertex.
inline BoxGraph compute_edges(BoxGraph g) {
    if (!(g.delta > 0.0)) throw DomainError("delta must be positive");
    const BoxQuadtree cover(g.bounds.half, g.boxes);
    const std::size_t n = g.boxes.size();
    std::vector<VertexImage> images(n);
    const unsigned workers = worker_count(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            images[v] = image_of(g.map, cover, g.geometry(static_cast<VertexIndex>(v)), g.delta);
        }
    };
    if (workers <= 1) {
        work(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t b = std::min(n, w * chunk);
            const std::size_t e = std::min(n, b + chunk);
            pool.emplace_back(work, b, e);
        }
    }
    std::vector<std::vector<VertexIndex>> adj(n);
    g.lambda.resize(n);
    g.exits.assign(n, false);
    for (std::size_t v = 0; v < n; ++v) {
        g.lambda[v] = images[v].lambda;
        g.exits[v] = images[v].exits;
        adj[v] = std::move(images[v].targets);
    }
    g.edges = Digraph(adj);
    g.has_edges = true;
    return g;
}

namespace detail {

// Keeps vertices flagged in `keep`, preserving order.
inline BoxGraph restrict_graph(const BoxGraph& g, const std::vector<bool>& keep) {
    std::vector<std::int64_t> remap(g.size(), -1);
    BoxGraph out{g.map, g.bounds, g.delta, {}, {}, {}, {}, g.has_edges};
    for (VertexIndex v = 0; v < g.size(); ++v) {
        if (!keep[v]) continue;
        remap[v] = static_cast<std::int64_t>(out.boxes.size());
        out.boxes.push_back(g.boxes[v]);
        out.lambda.push_back(g.lambda[v]);
        out.exits.push_back(g.exits[v]);
    }
    std::vector<std::vector<VertexIndex>> adj(out.boxes.size());
    for (VertexIndex v = 0; v < g.size(); ++v) {
        if (!keep[v]) continue;
        auto& row = adj[static_cast<std::size_t>(remap[v])];
        for (VertexIndex w : g.edges.successors(v)) {
            if (keep[w]) {
                row.push_back(static_cast<VertexIndex>(remap[w]));
            } else {
                // Part of the image now lands outside the cover.
                out.exits[static_cast<std::size_t>(remap[v])] = true;
            }
        }
    }
    out.edges = Digraph(adj);
    return out;
}

} // namespace detail

// Repeatedly removes boxes provably disjoint from J (see file comment) until
// every survivor lies on a cycle and can reach the outside of the cover.
inline BoxGraph prune_and_connect(BoxGraph g) {
    if (!g.has_edges) throw DomainError("prune_and_connect needs computed edges");
    for (;;) {
        const std::size_t n = g.size();
        std::vector<bool> keep(n, false);

        // Vertices that can reach an exiting vertex.
        const Digraph rev = g.edges.reversed();
        std::deque<VertexIndex> queue;
        for (VertexIndex v = 0; v < n; ++v) {
            if (g.exits[v]) {
                keep[v] = true;
                queue.push_back(v);
            }
        }
        while (!queue.empty()) {
            const VertexIndex v = queue.front();
            queue.pop_front();
            for (VertexIndex u : rev.successors(v)) {
                if (!keep[u]) {
                    keep[u] = true;
                    queue.push_back(u);
                }
            }
        }

        // Of those, only vertices in nontrivial strongly connected components
        // of the surviving subgraph. This also removes every source and sink.
        BoxGraph trimmed = detail::restrict_graph(g, keep);
        const Components comps = strongly_connected_components(trimmed.edges);
        std::vector<bool> keep2(trimmed.size());
        for (VertexIndex v = 0; v < trimmed.size(); ++v) keep2[v] = comps.nontrivial[comps.of[v]];
        BoxGraph next = detail::restrict_graph(trimmed, keep2);
        if (next.size() == 0) throw EmptyGraph();
        const bool stable = next.size() == n;
        g = std::move(next);
        if (stable) return g;
    }
}

inline std::vector<VertexIndex> all_vertices(const BoxGraph& g) {
    std::vector<VertexIndex> all(g.size());
    for (VertexIndex v = 0; v < g.size(); ++v) all[v] = v;
    return all;
}

// Replaces each selected box by its four children, recomputes edges against
// the new cover, then prunes. The result covers a subset of the input.
inline BoxGraph subdivide(const BoxGraph& g, const std::vector<VertexIndex>& subset, std::uint32_t max_depth) {
    if (subset.empty()) throw DomainError("subdivide needs a nonempty subset");
    std::vector<bool> split(g.size(), false);
    for (VertexIndex v : subset) {
        if (v >= g.size()) throw DomainError("subdivide: vertex index out of range");
        if (g.boxes[v].depth + 1 > max_depth) {
            throw DepthLimitExceeded("subdividing would exceed maximum depth " + std::to_string(max_depth));
        }
        split[v] = true;
    }
    std::vector<BoxId> boxes;
    boxes.reserve(g.size() + 3 * subset.size());
    for (VertexIndex v = 0; v < g.size(); ++v) {
        if (!split[v]) {
            boxes.push_back(g.boxes[v]);
        } else {
            for (unsigned q = 0; q < 4; ++q) boxes.push_back(g.boxes[v].child(q));
        }
    }
    std::sort(boxes.begin(), boxes.end());
    BoxGraph next{g.map, g.bounds, 0.0, std::move(boxes), {}, {}, {}, false};
    next.delta = default_delta(next.bounds.half, next.max_depth());
    return prune_and_connect(compute_edges(std::move(next)));
}

// Grid at depth `depth`, built by pruning a coarser grid and refining every
// surviving box level by level. Equivalent in guarantees to pruning the full
// fine grid, at a fraction of the cost.
inline BoxGraph build_model(const PolynomialMap& map, std::uint32_t depth, std::uint32_t coarse_depth = 6) {
    const std::uint32_t start = std::min(depth, coarse_depth);
    BoxGraph g = prune_and_connect(compute_edges(initial_grid(map, start)));
    while (g.max_depth() < depth) g = subdivide(g, all_vertices(g), depth);
    return g;
}

// Heuristic: boxes whose midpoint stays within radius `bound` for
// `iterations` floating-point iterates (attracted to a sink or slow to
// escape). Guides refinement only.
inline std::vector<VertexIndex> sink_basin_select(const BoxGraph& g, unsigned iterations, double bound) {
    if (iterations == 0) throw DomainError("sink basin selection needs at least one iteration");
    std::vector<VertexIndex> out;
    for (VertexIndex v = 0; v < g.size(); ++v) {
        std::complex<double> z = g.geometry(v).mid();
        bool bounded = true;
        for (unsigned k = 0; k < iterations && bounded; ++k) {
            z = g.map.eval_point(z);
            bounded = std::abs(z) <= bound;
        }
        if (bounded) out.push_back(v);
    }
    return out;
}

// Vertices whose box meets an enclosure of a critical point. Any such box
// has zero multiplier, so the model cannot be box expansive.
inline std::vector<VertexIndex> critical_check(const BoxGraph& g, const CriticalSet& crit) {
    std::vector<VertexIndex> out;
    for (VertexIndex v = 0; v < g.size(); ++v) {
        const ComplexBox b = g.geometry(v);
        for (const auto& c : crit.points) {
            if (b.intersects(c)) {
                out.push_back(v);
                break;
            }
        }
    }
    return out;
}

inline std::vector<VertexIndex> critical_check(const BoxGraph& g) { return critical_check(g, critical_points(g.map)); }

} // namespace hyperbox

#endif
