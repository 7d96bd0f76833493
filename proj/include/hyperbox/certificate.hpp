#ifndef HYPERBOX_CERTIFICATE_HPP
#define HYPERBOX_CERTIFICATE_HPP

// Versioned text certificate for a box chain model and its handicaps.
//
//   hyperbox-certificate 1
//   map <family> <param> <param> ...
//   half <h>
//   delta <d>
//   vertices <N> [handicaps]
//   <depth> <i> <j> <lambda> [<phi>]          N lines, canonical box order
//   adjacency <M>
//   <outdeg> <t1> <t2> ...                    N lines, M targets in total
//   trailer <L> <verified|unverified>         only with handicaps
//   end
//
// Every float is written as the exact decimal expansion of the stored
// binary64 value; the reader rejects decimals that are not exactly
// representable, so read(write(c)) == c and write(read(text)) == text.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyperbox/boxchain.hpp"
#include "hyperbox/decimal.hpp"
#include "hyperbox/dynamics.hpp"
#include "hyperbox/errors.hpp"
#include "hyperbox/interval.hpp"
#include "hyperbox/metric.hpp"

namespace hyperbox {

inline constexpr int kCertificateVersion = 1;

struct Certificate {
    MapSpec map;
    double half = 2.0;
    double delta = 0.0;
    std::vector<BoxId> boxes;
    std::vector<double> lambda;
    Digraph edges;
    std::optional<BoxMetric> metric;
    bool verified = false;

    MultiplierGraph multiplier_graph() const { return {edges, lambda}; }

    static Certificate from_graph(const BoxGraph& g, std::optional<BoxMetric> metric = std::nullopt,
                                  bool verified = false) {
        return {g.map.spec(), g.bounds.half, g.delta, g.boxes, g.lambda, g.edges, std::move(metric), verified};
    }

    friend bool operator==(const Certificate& a, const Certificate& b) {
        auto same_metric = [](const std::optional<BoxMetric>& x, const std::optional<BoxMetric>& y) {
            if (x.has_value() != y.has_value()) return false;
            return !x || (x->L == y->L && x->phi == y->phi);
        };
        return a.map == b.map && a.half == b.half && a.delta == b.delta && a.boxes == b.boxes &&
               a.lambda == b.lambda && a.edges == b.edges && same_metric(a.metric, b.metric) &&
               a.verified == b.verified;
    }
};

inline void write_certificate(std::ostream& os, const Certificate& c) {
    using decimal::format_exact;
    os << "hyperbox-certificate " << kCertificateVersion << '\n';
    os << "map " << family_name(c.map.family);
    for (const auto& p : c.map.params) os << ' ' << p;
    os << '\n';
    os << "half " << format_exact(c.half) << '\n';
    os << "delta " << format_exact(c.delta) << '\n';
    os << "vertices " << c.boxes.size() << (c.metric ? " handicaps" : "") << '\n';
    for (std::size_t v = 0; v < c.boxes.size(); ++v) {
        const auto& b = c.boxes[v];
        os << b.depth << ' ' << b.i << ' ' << b.j << ' ' << format_exact(c.lambda[v]);
        if (c.metric) os << ' ' << format_exact(c.metric->phi[v]);
        os << '\n';
    }
    os << "adjacency " << c.edges.edge_count() << '\n';
    for (VertexIndex v = 0; v < c.boxes.size(); ++v) {
        const auto s = c.edges.successors(v);
        os << s.size();
        for (VertexIndex t : s) os << ' ' << t;
        os << '\n';
    }
    if (c.metric) os << "trailer " << format_exact(c.metric->L) << ' ' << (c.verified ? "verified" : "unverified") << '\n';
    os << "end\n";
}

namespace detail {

class LineReader {
public:
    explicit LineReader(std::istream& is) : is_(is) {}

    std::istringstream next() {
        std::string line;
        if (!std::getline(is_, line)) fail("unexpected end of file");
        ++line_no_;
        return std::istringstream(line);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("certificate line " + std::to_string(line_no_) + ": " + what);
    }

    void expect_keyword(std::istringstream& ls, const std::string& kw) {
        std::string word;
        if (!(ls >> word) || word != kw) fail("expected '" + kw + "'");
    }

    void expect_end(std::istringstream& ls) {
        std::string extra;
        if (ls >> extra) fail("unexpected trailing field '" + extra + "'");
    }

    template <class T>
    T integer(std::istringstream& ls, const char* what) {
        std::string tok;
        if (!(ls >> tok)) fail(std::string("missing ") + what);
        T value{};
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(std::string("bad ") + what + " '" + tok + "'");
        return value;
    }

    double exact(std::istringstream& ls, const char* what) {
        std::string tok;
        if (!(ls >> tok)) fail(std::string("missing ") + what);
        Interval h;
        try {
            h = hull(tok);
        } catch (const ParseError&) {
            fail(std::string("bad ") + what + " '" + tok + "'");
        }
        if (!h.is_point() || !h.bounded()) fail(std::string(what) + " '" + tok + "' is not an exact binary64 value");
        return h.lo();
    }

private:
    std::istream& is_;
    std::size_t line_no_ = 0;
};

} // namespace detail

inline Certificate read_certificate(std::istream& is) {
    detail::LineReader r(is);
    Certificate c;
    {
        auto ls = r.next();
        r.expect_keyword(ls, "hyperbox-certificate");
        const int version = r.integer<int>(ls, "version");
        if (version != kCertificateVersion) r.fail("unsupported certificate version " + std::to_string(version));
        r.expect_end(ls);
    }
    {
        auto ls = r.next();
        r.expect_keyword(ls, "map");
        std::string fam;
        if (!(ls >> fam)) r.fail("missing map family");
        try {
            c.map.family = parse_family(fam);
        } catch (const ParseError& e) {
            r.fail(e.what());
        }
        std::string p;
        while (ls >> p) c.map.params.push_back(p);
        try {
            (void)PolynomialMap::from_spec(c.map);
        } catch (const Error& e) {
            r.fail(std::string("invalid map: ") + e.what());
        }
    }
    {
        auto ls = r.next();
        r.expect_keyword(ls, "half");
        c.half = r.exact(ls, "half");
        r.expect_end(ls);
    }
    {
        auto ls = r.next();
        r.expect_keyword(ls, "delta");
        c.delta = r.exact(ls, "delta");
        r.expect_end(ls);
    }
    std::size_t n = 0;
    bool with_phi = false;
    {
        auto ls = r.next();
        r.expect_keyword(ls, "vertices");
        n = r.integer<std::size_t>(ls, "vertex count");
        std::string flag;
        if (ls >> flag) {
            if (flag != "handicaps") r.fail("unknown vertex flag '" + flag + "'");
            with_phi = true;
        }
        r.expect_end(ls);
    }
    c.boxes.reserve(n);
    c.lambda.reserve(n);
    std::vector<double> phi;
    for (std::size_t v = 0; v < n; ++v) {
        auto ls = r.next();
        BoxId id;
        id.depth = r.integer<std::uint32_t>(ls, "depth");
        id.i = r.integer<std::uint32_t>(ls, "i");
        id.j = r.integer<std::uint32_t>(ls, "j");
        if (static_cast<int>(id.depth) > kMaxBoxDepth || (id.i >> id.depth) || (id.j >> id.depth)) {
            r.fail("box outside the grid");
        }
        c.boxes.push_back(id);
        c.lambda.push_back(r.exact(ls, "lambda"));
        if (with_phi) phi.push_back(r.exact(ls, "handicap"));
        r.expect_end(ls);
    }
    std::size_t m = 0;
    {
        auto ls = r.next();
        r.expect_keyword(ls, "adjacency");
        m = r.integer<std::size_t>(ls, "edge count");
        r.expect_end(ls);
    }
    std::vector<std::vector<VertexIndex>> adj(n);
    std::size_t seen_edges = 0;
    for (std::size_t v = 0; v < n; ++v) {
        auto ls = r.next();
        const auto deg = r.integer<std::size_t>(ls, "out-degree");
        for (std::size_t k = 0; k < deg; ++k) {
            const auto t = r.integer<VertexIndex>(ls, "edge target");
            if (t >= n) r.fail("edge target out of range");
            if (!adj[v].empty() && adj[v].back() >= t) r.fail("adjacency not strictly increasing");
            adj[v].push_back(t);
        }
        r.expect_end(ls);
        seen_edges += deg;
    }
    if (seen_edges != m) r.fail("edge count mismatch");
    c.edges = Digraph(adj);
    if (with_phi) {
        auto ls = r.next();
        r.expect_keyword(ls, "trailer");
        const double L = r.exact(ls, "L");
        std::string verdict;
        if (!(ls >> verdict) || (verdict != "verified" && verdict != "unverified")) r.fail("bad verdict");
        r.expect_end(ls);
        c.metric = BoxMetric{std::move(phi), L};
        c.verified = verdict == "verified";
    }
    {
        auto ls = r.next();
        r.expect_keyword(ls, "end");
        r.expect_end(ls);
    }
    return c;
}

inline std::string to_string(const Certificate& c) {
    std::ostringstream os;
    write_certificate(os, c);
    return os.str();
}

inline Certificate certificate_from_string(const std::string& text) {
    std::istringstream is(text);
    return read_certificate(is);
}

struct VerifyOutcome {
    bool ok = false;
    std::vector<std::string> problems;
};

// Re-derives everything the certificate claims from the map alone:
// disjoint boxes, multiplier bounds, the edge superset property, the box
// chain degree conditions, and the handicap inequality at the stored L > 1.
inline VerifyOutcome verify_certificate(const Certificate& c) {
    VerifyOutcome out;
    auto problem = [&](std::string s) { out.problems.push_back(std::move(s)); };
    const auto map = PolynomialMap::from_spec(c.map);
    DynamicalBounds bounds;
    try {
        bounds = dynamical_bounds(map);
    } catch (const Error& e) {
        problem(std::string("map outside certified family range: ") + e.what());
        return out;
    }
    if (c.half != bounds.half) problem("region half-width does not match the map's escape region");
    if (!(c.delta > 0.0)) problem("delta must be positive");
    if (c.boxes.empty()) problem("empty model");
    if (c.lambda.size() != c.boxes.size() || c.edges.size() != c.boxes.size()) {
        problem("dimension mismatch");
        return out;
    }
    for (std::size_t v = 1; v < c.boxes.size(); ++v) {
        if (!(c.boxes[v - 1] < c.boxes[v])) {
            problem("boxes not in canonical order");
            break;
        }
    }
    std::optional<BoxQuadtree> cover;
    try {
        cover.emplace(c.half, c.boxes);
    } catch (const Error& e) {
        problem(std::string("box set invalid: ") + e.what());
        return out;
    }

    const auto in_deg = c.edges.in_degrees();
    std::size_t lambda_bad = 0, edge_bad = 0, degree_bad = 0;
    for (VertexIndex v = 0; v < c.boxes.size(); ++v) {
        const ComplexBox box = box_geometry(c.boxes[v], c.half);
        if (!(c.lambda[v] <= multiplier_lower(map, box))) {
            if (lambda_bad++ == 0) problem("vertex " + std::to_string(v) + ": stored multiplier exceeds rigorous bound");
        }
        const ComplexBox img = map.eval(box);
        if (!img.bounded()) {
            if (edge_bad++ == 0) problem("vertex " + std::to_string(v) + ": image enclosure overflows");
            continue;
        }
        bool missing = false;
        cover->query(inflate(img, c.delta), [&](VertexIndex t) {
            if (!c.edges.has_edge(v, t)) missing = true;
        });
        if (missing && edge_bad++ == 0) problem("vertex " + std::to_string(v) + ": edge superset property violated");
        if ((c.edges.successors(v).empty() || in_deg[v] == 0) && degree_bad++ == 0) {
            problem("vertex " + std::to_string(v) + ": zero in- or out-degree");
        }
    }
    if (lambda_bad > 1) problem(std::to_string(lambda_bad) + " multiplier bounds invalid in total");
    if (edge_bad > 1) problem(std::to_string(edge_bad) + " edge lists incomplete in total");

    if (!c.metric) {
        problem("no handicaps");
    } else {
        if (!(c.metric->L > 1.0)) problem("expansion constant is not above 1");
        try {
            if (!verify_metric(c.multiplier_graph(), *c.metric)) problem("handicap inequality fails on some edge");
        } catch (const Error& e) {
            problem(e.what());
        }
    }
    out.ok = out.problems.empty();
    return out;
}

} // namespace hyperbox

#endif
