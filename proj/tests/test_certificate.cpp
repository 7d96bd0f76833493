#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hyperbox/certificate.hpp"
#include "hyperbox/pipeline.hpp"
#include "hyperbox/render.hpp"

using namespace hyperbox;

namespace {

Certificate basilica_certificate() {
    const BoxGraph g = build_model(PolynomialMap::quadratic("-1", "0"), 7);
    const FindLResult r = find_L(g.multiplier_graph(), 2.0);
    EXPECT_TRUE(r.expansive);
    return Certificate::from_graph(g, r.metric, true);
}

// A vertex with an out-edge on which the handicap inequality is tight.
std::pair<VertexIndex, VertexIndex> tight_edge(const Certificate& c) {
    const auto& phi = c.metric->phi;
    for (VertexIndex u = 0; u < c.boxes.size(); ++u) {
        const double need = rounding::div_up(rounding::mul_up(c.metric->L, phi[u]), c.lambda[u]);
        for (VertexIndex v : c.edges.successors(u)) {
            if (phi[v] == need) return {u, v};
        }
    }
    ADD_FAILURE() << "no tight edge";
    return {0, 0};
}

} // namespace

TEST(Certificate, RoundTripIsBitExact) {
    const Certificate c = basilica_certificate();
    const std::string text = to_string(c);
    const Certificate back = certificate_from_string(text);
    EXPECT_EQ(back, c);
    EXPECT_EQ(to_string(back), text);
}

TEST(Certificate, VerifiesUnmodified) {
    const auto out = verify_certificate(basilica_certificate());
    EXPECT_TRUE(out.ok) << (out.problems.empty() ? "" : out.problems.front());
}

TEST(Certificate, TamperedFieldsRejected) {
    const Certificate c = basilica_certificate();
    const auto [u, v] = tight_edge(c);

    Certificate lam_up = c;
    lam_up.lambda[u] *= 1.1;
    EXPECT_FALSE(verify_certificate(lam_up).ok);

    Certificate lam_down = c;
    lam_down.lambda[u] *= 0.9;
    EXPECT_FALSE(verify_certificate(lam_down).ok);

    Certificate phi_down = c;
    phi_down.metric->phi[v] *= 0.9;
    EXPECT_FALSE(verify_certificate(phi_down).ok);

    Certificate phi_up = c;
    phi_up.metric->phi[u] *= 1.1;
    EXPECT_FALSE(verify_certificate(phi_up).ok);

    Certificate l_up = c;
    l_up.metric->L += 0.02;
    EXPECT_FALSE(verify_certificate(l_up).ok);

    Certificate l_one = c;
    l_one.metric->L = 1.0;
    EXPECT_FALSE(verify_certificate(l_one).ok);
}

TEST(Certificate, StructuralTamperingRejected) {
    const Certificate c = basilica_certificate();

    Certificate dropped = c;
    std::vector<std::vector<VertexIndex>> adj(c.boxes.size());
    for (VertexIndex u = 0; u < c.boxes.size(); ++u) {
        const auto s = c.edges.successors(u);
        adj[u].assign(s.begin(), s.end());
    }
    adj[0].pop_back();
    dropped.edges = Digraph(adj);
    EXPECT_FALSE(verify_certificate(dropped).ok);

    Certificate wrong_map = c;
    wrong_map.map.params[0] = "-0.9";
    EXPECT_FALSE(verify_certificate(wrong_map).ok);

    Certificate no_metric = c;
    no_metric.metric.reset();
    EXPECT_FALSE(verify_certificate(no_metric).ok);

    Certificate overlap = c;
    overlap.boxes[1] = overlap.boxes[0].child(0);
    EXPECT_FALSE(verify_certificate(overlap).ok);
}

TEST(Certificate, ParseErrorsCarryLineNumbers) {
    const std::string text = to_string(basilica_certificate());
    try {
        certificate_from_string("hyperbox-certificate 2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    }
    // 0.1 is not a binary64 value.
    std::string inexact = text;
    const auto pos = inexact.find("delta ");
    inexact.replace(pos, inexact.find('\n', pos) - pos, "delta 0.1");
    try {
        certificate_from_string(inexact);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
    }
    EXPECT_THROW(certificate_from_string(text.substr(0, text.size() / 2)), ParseError);
}

TEST(Render, ShadingAndSizes) {
    const std::vector<BoxId> boxes{{3, 0, 0}, {3, 1, 0}, {4, 6, 7}};
    const GrayImage plain = render(boxes, nullptr);
    EXPECT_EQ(plain.width, 16u);
    EXPECT_EQ(plain.at(0, 15), kPlainFill);
    EXPECT_EQ(plain.at(15, 0), kBackground);

    const std::vector<double> equal{2.0, 2.0, 2.0};
    EXPECT_EQ(render(boxes, &equal).at(0, 15), kMidGray);

    const std::vector<double> ramp{1.0, 10.0, 100.0};
    const GrayImage shaded = render(boxes, &ramp);
    EXPECT_EQ(shaded.at(0, 15), 0);     // smallest handicap, darkest
    EXPECT_EQ(shaded.at(2, 15), 127);   // geometric middle
    EXPECT_EQ(shaded.at(6, 8), 254);

    const GrayImage capped = render(boxes, nullptr, 4);
    EXPECT_EQ(capped.width, 4u);
    EXPECT_EQ(capped.at(0, 3), kPlainFill);
    EXPECT_EQ(capped.at(3, 0), kBackground);

    const GrayImage empty = render({}, nullptr);
    EXPECT_EQ(empty.pixels, std::vector<std::uint8_t>{kBackground});
}

TEST(Render, BasilicaSpansRamp) {
    const Certificate c = basilica_certificate();
    const GrayImage img = render(c.boxes, &c.metric->phi);
    EXPECT_EQ(img.width, 128u);
    std::uint8_t lo = 255, hi = 0;
    for (auto p : img.pixels) {
        if (p == kBackground) continue;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    EXPECT_EQ(lo, 0);
    EXPECT_EQ(hi, 254);
    std::ostringstream os;
    write_pgm(os, img);
    EXPECT_EQ(os.str().rfind("P5\n128 128\n255\n", 0), 0u);
    EXPECT_EQ(os.str().size(), 15u + 128 * 128);
}
