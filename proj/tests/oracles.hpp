#ifndef HYPERBOX_TESTS_ORACLES_HPP
#define HYPERBOX_TESTS_ORACLES_HPP

// Independent test oracles: exact rational arithmetic, random graphs and
// brute-force cycle enumeration. Nothing here calls into the library's
// numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hyperbox/digraph.hpp"
#include "hyperbox/interval.hpp"
#include "hyperbox/metric.hpp"

namespace oracle {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

// Exact value of a finite double.
inline Rational exact(double x) {
    int e = 0;
    const double m = std::frexp(x, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    Rational r = mant;
    e -= 53;
    const Rational two = 2;
    Rational scale = 1;
    for (int k = 0; k < std::abs(e); ++k) scale *= two;
    return e >= 0 ? r * scale : r / scale;
}

// lo <= x and x <= hi, with infinite endpoints compared symbolically.
inline bool lower_bounds(double lo, const Rational& x) { return lo == -INFINITY || (std::isfinite(lo) && exact(lo) <= x); }
inline bool upper_bounds(double hi, const Rational& x) { return hi == INFINITY || (std::isfinite(hi) && x <= exact(hi)); }

inline Rational rpow(const Rational& x, unsigned n) {
    Rational r = 1;
    for (unsigned k = 0; k < n; ++k) r *= x;
    return r;
}

// Random doubles over a wide exponent range, both signs, with occasional
// exact small integers and zeros.
inline double random_double(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_real_distribution<double> unit(0.5, 1.0);
    std::uniform_int_distribution<int> expo(-60, 60);
    std::bernoulli_distribution neg(0.5);
    double x = 0.0;
    switch (kind(rng)) {
    case 0: x = 0.0; break;
    case 1: x = std::uniform_int_distribution<int>(-8, 8)(rng); break;
    case 2: x = std::ldexp(unit(rng), std::uniform_int_distribution<int>(-1060, -1000)(rng)); break;
    default: x = std::ldexp(unit(rng), expo(rng)); break;
    }
    return neg(rng) ? -x : x;
}

inline hyperbox::Interval random_interval(std::mt19937_64& rng) {
    double a = random_double(rng);
    double b = std::bernoulli_distribution(0.2)(rng) ? a : random_double(rng);
    if (a > b) std::swap(a, b);
    return {a, b};
}

struct SimpleCycle {
    std::vector<hyperbox::VertexIndex> vertices;
    Rational product;
};

// All simple cycles, each listed once starting from its smallest vertex.
inline std::vector<SimpleCycle> enumerate_cycles(const hyperbox::Digraph& g, const std::vector<double>& lambda) {
    const auto n = static_cast<hyperbox::VertexIndex>(g.size());
    std::vector<SimpleCycle> out;
    std::vector<hyperbox::VertexIndex> path;
    std::vector<char> on(n, 0);
    std::function<void(hyperbox::VertexIndex, hyperbox::VertexIndex)> walk = [&](hyperbox::VertexIndex root,
                                                                                 hyperbox::VertexIndex v) {
        for (auto w : g.successors(v)) {
            if (w == root) {
                Rational p = 1;
                for (auto u : path) p *= exact(lambda[u]);
                out.push_back({path, p});
            } else if (w > root && !on[w]) {
                on[w] = 1;
                path.push_back(w);
                walk(root, w);
                path.pop_back();
                on[w] = 0;
            }
        }
    };
    for (hyperbox::VertexIndex r = 0; r < n; ++r) {
        path = {r};
        on[r] = 1;
        walk(r, r);
        on[r] = 0;
    }
    return out;
}

// (a.product)^(1/|a|) < (b.product)^(1/|b|), decided exactly.
inline bool smaller_average(const SimpleCycle& a, const SimpleCycle& b) {
    return rpow(a.product, static_cast<unsigned>(b.vertices.size())) <
           rpow(b.product, static_cast<unsigned>(a.vertices.size()));
}

struct BruteForce {
    SimpleCycle min_average;  // attains the minimum average multiplier
    SimpleCycle min_product;  // attains the minimum cycle multiplier
    double average = 0.0;     // min average as a double (advisory)
    std::vector<SimpleCycle> cycles;
};

inline double average_of(const SimpleCycle& c) {
    return std::pow(static_cast<double>(c.product), 1.0 / static_cast<double>(c.vertices.size()));
}

inline BruteForce brute_force(const hyperbox::MultiplierGraph& mg) {
    BruteForce b;
    b.cycles = enumerate_cycles(mg.graph, mg.lambda);
    b.min_average = b.min_product = b.cycles.front();
    for (const auto& c : b.cycles) {
        if (smaller_average(c, b.min_average)) b.min_average = c;
        if (c.product < b.min_product.product) b.min_product = c;
    }
    b.average = average_of(b.min_average);
    return b;
}

// Random strongly connected digraph: a Hamiltonian cycle through a random
// permutation plus extra edges, with dyadic multipliers k/16 in [lo, hi].
inline hyperbox::MultiplierGraph random_strong_graph(std::mt19937_64& rng, std::size_t n, double extra_p,
                                                     int k_lo = 4, int k_hi = 64) {
    std::vector<hyperbox::VertexIndex> perm(n);
    for (std::size_t v = 0; v < n; ++v) perm[v] = static_cast<hyperbox::VertexIndex>(v);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::pair<hyperbox::VertexIndex, hyperbox::VertexIndex>> edges;
    for (std::size_t k = 0; k < n; ++k) edges.emplace_back(perm[k], perm[(k + 1) % n]);
    std::bernoulli_distribution coin(extra_p);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (coin(rng)) edges.emplace_back(static_cast<hyperbox::VertexIndex>(u), static_cast<hyperbox::VertexIndex>(v));
        }
    }
    std::uniform_int_distribution<int> kdist(k_lo, k_hi);
    std::vector<double> lambda(n);
    for (auto& l : lambda) l = kdist(rng) / 16.0;
    return {hyperbox::Digraph::from_edges(n, edges), lambda};
}

// Is `cyc` a closed walk in g?
inline bool is_cycle(const hyperbox::Digraph& g, const std::vector<hyperbox::VertexIndex>& cyc) {
    if (cyc.empty()) return false;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
        if (!g.has_edge(cyc[k], cyc[(k + 1) % cyc.size()])) return false;
    }
    return true;
}

// Exact check of phi_v >= L phi_u / lambda_u on every edge.
inline bool consistent_exact(const hyperbox::MultiplierGraph& mg, const std::vector<double>& phi, double L) {
    const Rational RL = exact(L);
    for (hyperbox::VertexIndex u = 0; u < mg.size(); ++u) {
        for (auto v : mg.graph.successors(u)) {
            if (exact(phi[v]) * exact(mg.lambda[u]) < RL * exact(phi[u])) return false;
        }
    }
    return true;
}

} // namespace oracle

#endif
