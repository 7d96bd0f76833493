#ifndef HYPERBOX_PIPELINE_HPP
#define HYPERBOX_PIPELINE_HPP

// Refinement loop: build a box chain model, look for critical boxes, search
// for an expansion constant, and refine where the model fails.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hyperbox/boxchain.hpp"
#include "hyperbox/certificate.hpp"
#include "hyperbox/dynamics.hpp"
#include "hyperbox/errors.hpp"
#include "hyperbox/metric.hpp"
#include "hyperbox/render.hpp"

namespace hyperbox {

inline constexpr int kReportVersion = 1;

enum class Strategy { Uniform, WeakCycle, SinkBasin };

inline const char* strategy_name(Strategy s) {
    switch (s) {
    case Strategy::Uniform: return "uniform";
    case Strategy::WeakCycle: return "weak-cycle";
    case Strategy::SinkBasin: return "sink-basin";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& s) {
    if (s == "uniform") return Strategy::Uniform;
    if (s == "weak-cycle") return Strategy::WeakCycle;
    if (s == "sink-basin") return Strategy::SinkBasin;
    throw ParseError("unknown strategy '" + s + "'");
}

enum class Verdict { BoxExpansive, NotExpansiveAtThisResolution, CriticalPointInB, BudgetExhausted };

inline const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::BoxExpansive: return "BoxExpansive";
    case Verdict::NotExpansiveAtThisResolution: return "NotExpansiveAtThisResolution";
    case Verdict::CriticalPointInB: return "CriticalPointInB";
    case Verdict::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

struct RunConfig {
    MapSpec map;
    std::uint32_t depth = 7;
    std::uint32_t max_depth = 12;
    std::uint32_t coarse_depth = 6;  // first grid before uniform refinement
    double l_step = 0.01;
    std::optional<double> l_hi;      // default: degree of the map
    double l_floor = 1.0005;         // failing cycles at or below this trigger refinement
    Strategy strategy = Strategy::WeakCycle;
    bool weak_cycle_neighborhood = false;
    unsigned rounds = 4;
    unsigned sink_iterations = 20;
    double sink_bound = 2.0;
    std::optional<std::uint64_t> seed;
    std::string out_dir;  // empty: no files

    void validate() const {
        if (depth > max_depth) throw ParameterOutOfRange("initial depth exceeds max depth");
        if (static_cast<int>(max_depth) > kMaxBoxDepth) throw ParameterOutOfRange("max depth too large");
        if (!(l_step > 0.0)) throw ParameterOutOfRange("L step must be positive");
        if (l_hi && !(*l_hi >= 1.0)) throw ParameterOutOfRange("L_hi must be at least 1");
        if (sink_iterations == 0) throw ParameterOutOfRange("sink iterations must be positive");
    }
};

struct AttemptRecord {
    double L = 0.0;
    bool success = false;
    std::optional<double> cycle_avg;
    std::size_t cycle_length = 0;
};

struct RoundRecord {
    unsigned round = 0;
    std::map<std::uint32_t, std::size_t> depth_profile;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::size_t critical_hits = 0;
    std::vector<AttemptRecord> attempts;
    std::string outcome;
    std::size_t subdivided = 0;
};

struct RunReport {
    std::vector<RoundRecord> rounds;
    Verdict verdict = Verdict::BudgetExhausted;
    std::optional<double> L;
    std::optional<HandicapStats> stats;
    std::uint32_t depth_min = 0;
    std::uint32_t depth_max = 0;
    std::size_t vertices = 0;
    std::size_t edges = 0;
    std::string error;  // set when a module error ended the run
    double wall_seconds = 0.0;
    std::size_t peak_memory_bytes = 0;
};

struct RunResult {
    RunReport report;
    std::optional<BoxGraph> graph;
    std::optional<BoxMetric> metric;
    std::optional<Certificate> certificate;
};

inline std::size_t peak_memory_bytes() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream ls(line.substr(6));
            std::size_t kb = 0;
            ls >> kb;
            return kb * 1024;
        }
    }
    return 0;
}

namespace detail {

inline std::vector<VertexIndex> merge_sets(std::vector<VertexIndex> a, const std::vector<VertexIndex>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline std::vector<VertexIndex> below_depth(const BoxGraph& g, const std::vector<VertexIndex>& sel, std::uint32_t max_depth) {
    std::vector<VertexIndex> out;
    for (VertexIndex v : sel) {
        if (g.boxes[v].depth < max_depth) out.push_back(v);
    }
    return out;
}

inline std::vector<VertexIndex> with_neighbors(const BoxGraph& g, const std::vector<VertexIndex>& sel) {
    std::vector<VertexIndex> out = sel;
    const Digraph rev = g.edges.reversed();
    for (VertexIndex v : sel) {
        for (VertexIndex w : g.edges.successors(v)) out.push_back(w);
        for (VertexIndex w : rev.successors(v)) out.push_back(w);
    }
    return merge_sets(std::move(out), {});
}

} // namespace detail

inline RunResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    RunReport& rep = result.report;
    const PolynomialMap map = PolynomialMap::from_spec(cfg.map);
    const CriticalSet crit = critical_points(map);
    FindLOptions fl_opts;
    fl_opts.step = cfg.l_step;
    fl_opts.floor = cfg.l_floor;
    fl_opts.metric.root_seed = cfg.seed;
    const double l_hi = cfg.l_hi.value_or(static_cast<double>(map.degree()));

    try {
        BoxGraph g = build_model(map, cfg.depth, cfg.coarse_depth);
        for (unsigned round = 0;; ++round) {
            RoundRecord rec;
            rec.round = round;
            rec.vertices = g.size();
            rec.edges = g.edges.edge_count();
            for (const auto& b : g.boxes) ++rec.depth_profile[b.depth];

            std::vector<VertexIndex> select;
            Verdict stuck;
            const auto hits = critical_check(g, crit);
            rec.critical_hits = hits.size();
            if (!hits.empty()) {
                rec.outcome = "critical-point-in-B";
                stuck = Verdict::CriticalPointInB;
                select = hits;
                if (cfg.strategy == Strategy::SinkBasin) {
                    select = detail::merge_sets(select, sink_basin_select(g, cfg.sink_iterations, cfg.sink_bound));
                } else if (cfg.strategy == Strategy::Uniform) {
                    select = all_vertices(g);
                }
            } else {
                const FindLResult fl = find_L(g.multiplier_graph(), l_hi, fl_opts);
                for (const auto& t : fl.trials) {
                    AttemptRecord a{t.L, t.success, std::nullopt, 0};
                    if (t.cycle) {
                        a.cycle_avg = t.cycle->avg_multiplier;
                        a.cycle_length = t.cycle->length();
                    }
                    rec.attempts.push_back(a);
                }
                if (fl.expansive) {
                    Certificate cert = Certificate::from_graph(g, *fl.metric, false);
                    const VerifyOutcome check = verify_certificate(cert);
                    if (!check.ok) {
                        throw Error("internal: emitted certificate failed verification: " + check.problems.front());
                    }
                    cert.verified = true;
                    rec.outcome = "box-expansive";
                    rep.rounds.push_back(rec);
                    rep.verdict = Verdict::BoxExpansive;
                    rep.L = fl.metric->L;
                    rep.stats = fl.metric->normalized_stats();
                    result.metric = fl.metric;
                    result.certificate = std::move(cert);
                    result.graph = std::move(g);
                    break;
                }
                rec.outcome = "not-expansive";
                stuck = Verdict::NotExpansiveAtThisResolution;
                const std::vector<VertexIndex> weak = fl.cycle ? fl.cycle->vertices : std::vector<VertexIndex>{};
                switch (cfg.strategy) {
                case Strategy::WeakCycle:
                    select = cfg.weak_cycle_neighborhood ? detail::with_neighbors(g, weak) : weak;
                    break;
                case Strategy::SinkBasin:
                    select = detail::merge_sets(sink_basin_select(g, cfg.sink_iterations, cfg.sink_bound), weak);
                    break;
                case Strategy::Uniform: select = all_vertices(g); break;
                }
            }

            select = detail::merge_sets(detail::below_depth(g, select, cfg.max_depth), {});
            if (round >= cfg.rounds || select.empty()) {
                rep.rounds.push_back(rec);
                rep.verdict = (round >= cfg.rounds && cfg.rounds > 0 && !select.empty()) ? Verdict::BudgetExhausted : stuck;
                result.certificate = Certificate::from_graph(g);
                result.graph = std::move(g);
                break;
            }
            rec.subdivided = select.size();
            rep.rounds.push_back(rec);
            g = subdivide(g, select, cfg.max_depth);
        }
    } catch (const EmptyGraph& e) {
        rep.verdict = Verdict::NotExpansiveAtThisResolution;
        rep.error = e.what();
    }

    if (result.graph) {
        rep.vertices = result.graph->size();
        rep.edges = result.graph->edges.edge_count();
        rep.depth_min = UINT32_MAX;
        for (const auto& b : result.graph->boxes) {
            rep.depth_min = std::min(rep.depth_min, b.depth);
            rep.depth_max = std::max(rep.depth_max, b.depth);
        }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.peak_memory_bytes = peak_memory_bytes();
    return result;
}

// Deterministic part of the report: identical configs give identical bytes.
inline nlohmann::ordered_json report_json(const RunConfig& cfg, const RunReport& rep) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["report_version"] = kReportVersion;
    ordered_json c;
    c["map"] = family_name(cfg.map.family);
    c["params"] = cfg.map.params;
    c["depth"] = cfg.depth;
    c["max_depth"] = cfg.max_depth;
    c["l_step"] = cfg.l_step;
    if (cfg.l_hi) c["l_hi"] = *cfg.l_hi;
    c["strategy"] = strategy_name(cfg.strategy);
    c["rounds"] = cfg.rounds;
    c["sink_iterations"] = cfg.sink_iterations;
    c["sink_bound"] = cfg.sink_bound;
    if (cfg.seed) c["seed"] = *cfg.seed;
    j["config"] = c;

    ordered_json rounds = ordered_json::array();
    for (const auto& r : rep.rounds) {
        ordered_json jr;
        jr["round"] = r.round;
        ordered_json prof = ordered_json::object();
        for (auto [d, n] : r.depth_profile) prof[std::to_string(d)] = n;
        jr["depth_profile"] = prof;
        jr["vertices"] = r.vertices;
        jr["edges"] = r.edges;
        jr["critical_hits"] = r.critical_hits;
        ordered_json att = ordered_json::array();
        for (const auto& a : r.attempts) {
            ordered_json ja;
            ja["L"] = a.L;
            ja["success"] = a.success;
            if (a.cycle_avg) {
                ja["cycle_avg"] = *a.cycle_avg;
                ja["cycle_length"] = a.cycle_length;
            }
            att.push_back(ja);
        }
        jr["attempts"] = att;
        jr["outcome"] = r.outcome;
        jr["subdivided"] = r.subdivided;
        rounds.push_back(jr);
    }
    j["rounds"] = rounds;

    ordered_json t;
    t["box_depth_min"] = rep.depth_min;
    t["box_depth_max"] = rep.depth_max;
    t["boxes"] = rep.vertices;
    t["edges"] = rep.edges;
    t["box_expansive"] = rep.verdict == Verdict::BoxExpansive;
    t["L"] = rep.L ? ordered_json(*rep.L) : ordered_json(nullptr);
    t["phi_max"] = rep.stats ? ordered_json(rep.stats->max) : ordered_json(nullptr);
    t["phi_min"] = rep.stats ? ordered_json(rep.stats->min) : ordered_json(nullptr);
    t["phi_avg"] = rep.stats ? ordered_json(rep.stats->avg) : ordered_json(nullptr);
    j["summary"] = t;
    j["verdict"] = verdict_name(rep.verdict);
    if (!rep.error.empty()) j["error"] = rep.error;
    return j;
}

// Write to a sibling temporary, then rename over the destination.
template <class Writer>
void write_atomically(const std::filesystem::path& path, Writer&& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        writer(os);
        os.flush();
        if (!os) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

struct OutputPaths {
    std::filesystem::path certificate;
    std::filesystem::path report;
    std::filesystem::path timing;
    std::filesystem::path image;
};

inline OutputPaths output_paths(const std::filesystem::path& dir) {
    return {dir / "certificate.txt", dir / "report.json", dir / "timing.json", dir / "model.pgm"};
}

inline OutputPaths write_outputs(const RunConfig& cfg, const RunResult& res) {
    const std::filesystem::path dir = cfg.out_dir;
    std::filesystem::create_directories(dir);
    const OutputPaths paths = output_paths(dir);
    if (res.certificate) {
        write_atomically(paths.certificate, [&](std::ostream& os) { write_certificate(os, *res.certificate); });
    }
    write_atomically(paths.report, [&](std::ostream& os) { os << report_json(cfg, res.report).dump(2) << '\n'; });
    write_atomically(paths.timing, [&](std::ostream& os) {
        nlohmann::ordered_json t;
        t["wall_seconds"] = res.report.wall_seconds;
        t["peak_memory_bytes"] = res.report.peak_memory_bytes;
        os << t.dump(2) << '\n';
    });
    if (res.graph) {
        const std::vector<double>* phi = res.metric ? &res.metric->phi : nullptr;
        write_atomically(paths.image, [&](std::ostream& os) { write_pgm(os, render(res.graph->boxes, phi)); });
    }
    return paths;
}

} // namespace hyperbox

#endif
