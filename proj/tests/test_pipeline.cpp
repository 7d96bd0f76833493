#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hyperbox/pipeline.hpp"

using namespace hyperbox;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

RunConfig config(const std::string& c, std::uint32_t depth) {
    RunConfig cfg;
    cfg.map = {Family::Quadratic, {c, "0"}};
    cfg.depth = depth;
    cfg.max_depth = depth + 2;
    return cfg;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hyperbox_test_" + name);
    fs::remove_all(p);
    return p;
}

} // namespace

TEST(Pipeline, ConfigValidation) {
    RunConfig cfg = config("-1", 7);
    cfg.max_depth = 6;
    EXPECT_THROW(run_pipeline(cfg), ParameterOutOfRange);
    cfg = config("-1", 7);
    cfg.l_step = 0.0;
    EXPECT_THROW(run_pipeline(cfg), ParameterOutOfRange);
    EXPECT_THROW(parse_strategy("random"), ParseError);
}

TEST(Pipeline, BasilicaVerdictAndCounts) {
    const RunResult r = run_pipeline(config("-1", 7));
    ASSERT_EQ(r.report.verdict, Verdict::BoxExpansive);
    ASSERT_TRUE(r.certificate && r.certificate->verified);
    EXPECT_TRUE(verify_certificate(*r.certificate).ok);
    EXPECT_EQ(r.report.vertices, r.certificate->boxes.size());
    EXPECT_EQ(r.report.edges, r.certificate->edges.edge_count());
    EXPECT_GE(*r.report.L, 1.10);
}

TEST(Pipeline, NotExpansiveWithoutRounds) {
    // The aeroplane at depth 10 has no critical box but a weak cycle.
    RunConfig cfg = config("-1.755", 10);
    cfg.rounds = 0;
    const RunResult r = run_pipeline(cfg);
    EXPECT_EQ(r.report.verdict, Verdict::NotExpansiveAtThisResolution);
    EXPECT_FALSE(r.metric.has_value());
    ASSERT_TRUE(r.certificate.has_value());
    EXPECT_FALSE(r.certificate->metric.has_value());
}

TEST(Pipeline, BudgetExhausted) {
    // Parabolic c = 1/4: the fixed point 1/2 has multiplier exactly 1.
    RunConfig cfg = config("0.25", 6);
    cfg.rounds = 1;
    cfg.max_depth = 9;
    const RunResult r = run_pipeline(cfg);
    EXPECT_EQ(r.report.verdict, Verdict::BudgetExhausted);
    EXPECT_EQ(r.report.rounds.size(), 2u);
    EXPECT_GT(r.report.rounds[0].subdivided, 0u);
}

TEST(Pipeline, OutputsAreReproducible) {
    const fs::path a = scratch("repro_a"), b = scratch("repro_b");
    for (const auto& dir : {a, b}) {
        RunConfig cfg = config("0.35", 7);
        cfg.out_dir = dir.string();
        write_outputs(cfg, run_pipeline(cfg));
    }
    const auto pa = output_paths(a), pb = output_paths(b);
    EXPECT_EQ(slurp(pa.certificate), slurp(pb.certificate));
    EXPECT_EQ(slurp(pa.report), slurp(pb.report));
    EXPECT_EQ(slurp(pa.image), slurp(pb.image));
    EXPECT_TRUE(fs::exists(pa.timing));
    for (const auto& e : fs::directory_iterator(a)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Pipeline, ReportSchema) {
    RunConfig cfg = config("-1", 7);
    const RunResult r = run_pipeline(cfg);
    const auto j = report_json(cfg, r.report);
    EXPECT_EQ(j["report_version"], kReportVersion);
    for (const char* key : {"box_depth_min", "box_depth_max", "boxes", "edges", "box_expansive", "L", "phi_max",
                            "phi_min", "phi_avg"}) {
        EXPECT_TRUE(j["summary"].contains(key)) << key;
    }
    EXPECT_EQ(j["verdict"], "BoxExpansive");
    EXPECT_EQ(j["summary"]["boxes"], r.certificate->boxes.size());
    EXPECT_EQ(j["summary"]["phi_max"], 1.0);
    // Certificate line counts match the report.
    std::istringstream cert(to_string(*r.certificate));
    std::string line;
    std::size_t box_lines = 0, section = 0, edge_total = 0;
    while (std::getline(cert, line)) {
        if (line.rfind("vertices", 0) == 0) { section = 1; continue; }
        if (line.rfind("adjacency", 0) == 0) { section = 2; continue; }
        if (line.rfind("trailer", 0) == 0 || line == "end") { section = 0; continue; }
        if (section == 1) ++box_lines;
        if (section == 2) edge_total += std::stoul(line.substr(0, line.find(' ')));
    }
    EXPECT_EQ(box_lines, j["summary"]["boxes"].get<std::size_t>());
    EXPECT_EQ(edge_total, j["summary"]["edges"].get<std::size_t>());
}

TEST(Pipeline, WeakCycleRefinementSubdividesCycle) {
    // Depth 10 is too coarse for the aeroplane.
    RunConfig cfg = config("-1.755", 10);
    cfg.rounds = 2;
    cfg.max_depth = 12;
    const RunResult r = run_pipeline(cfg);
    ASSERT_FALSE(r.report.rounds.empty());
    for (std::size_t k = 0; k + 1 < r.report.rounds.size(); ++k) {
        EXPECT_GT(r.report.rounds[k].subdivided, 0u);
        EXPECT_EQ(r.report.rounds[k].outcome, "not-expansive");
    }
}

TEST(Pipeline, CriticalBoxesTakePriority) {
    // Coarse cubic model keeps boxes at the critical points.
    RunConfig cfg;
    cfg.map = {Family::CubicSym, {"-0.44", "-0.525", "0", "0.3"}};
    cfg.depth = 5;
    cfg.max_depth = 7;
    cfg.rounds = 2;
    cfg.strategy = Strategy::SinkBasin;
    const RunResult r = run_pipeline(cfg);
    ASSERT_FALSE(r.report.rounds.empty());
    EXPECT_GT(r.report.rounds[0].critical_hits, 0u);
    EXPECT_EQ(r.report.rounds[0].outcome, "critical-point-in-B");
    EXPECT_TRUE(r.report.rounds[0].attempts.empty());
}
