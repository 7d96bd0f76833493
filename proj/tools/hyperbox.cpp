// Command-line driver: run, verify, render, oracle.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hyperbox/certificate.hpp"
#include "hyperbox/oracle.hpp"
#include "hyperbox/pipeline.hpp"
#include "hyperbox/render.hpp"

namespace {

using namespace hyperbox;

constexpr int kExitOk = 0;
constexpr int kExitNotCertified = 1;
constexpr int kExitError = 2;

Certificate load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    return read_certificate(is);
}

struct RunArgs {
    std::string family = "quadratic";
    std::vector<std::string> c{"0", "0"};
    std::vector<std::string> a{"0", "0"};
    std::vector<std::string> coeffs;
    std::string strategy = "weak-cycle";
    std::optional<double> l_hi;
    std::optional<std::uint64_t> seed;
};

MapSpec map_spec(const RunArgs& args) {
    const Family f = parse_family(args.family);
    switch (f) {
    case Family::Quadratic: return {f, args.c};
    case Family::CubicSym: return {f, {args.c[0], args.c[1], args.a[0], args.a[1]}};
    case Family::General: return {f, args.coeffs};
    }
    return {};
}

int cmd_run(RunConfig cfg, const RunArgs& args) {
    cfg.map = map_spec(args);
    cfg.strategy = parse_strategy(args.strategy);
    cfg.l_hi = args.l_hi;
    cfg.seed = args.seed;
    const RunResult res = run_pipeline(cfg);
    const RunReport& rep = res.report;
    for (const auto& r : rep.rounds) {
        std::cout << "round " << r.round << ": " << r.vertices << " boxes, " << r.edges << " edges, "
                  << r.critical_hits << " critical, " << r.attempts.size() << " L attempts -> " << r.outcome;
        if (r.subdivided) std::cout << ", subdivided " << r.subdivided;
        std::cout << '\n';
    }
    std::cout << "verdict: " << verdict_name(rep.verdict);
    if (rep.L) std::cout << " L=" << *rep.L;
    std::cout << '\n';
    if (rep.stats) std::cout << "phi (normalized): min " << rep.stats->min << " avg " << rep.stats->avg << " max " << rep.stats->max << '\n';
    if (!rep.error.empty()) std::cerr << "warning: " << rep.error << '\n';
    std::cout << "time " << rep.wall_seconds << " s, peak memory " << rep.peak_memory_bytes / (1024 * 1024) << " MiB\n";
    if (!cfg.out_dir.empty()) {
        const OutputPaths p = write_outputs(cfg, res);
        if (!res.graph) std::cerr << "warning: empty model, no image written\n";
        std::cout << "wrote " << p.report.string() << '\n';
    }
    return rep.verdict == Verdict::BoxExpansive ? kExitOk : kExitNotCertified;
}

int cmd_verify(const std::string& path) {
    const Certificate cert = load(path);
    const VerifyOutcome out = verify_certificate(cert);
    if (out.ok) {
        std::cout << "OK: " << cert.boxes.size() << " boxes, L=" << cert.metric->L << '\n';
        return kExitOk;
    }
    for (const auto& p : out.problems) std::cout << "FAIL: " << p << '\n';
    return kExitNotCertified;
}

int cmd_render(const std::string& path, const std::string& image, std::uint32_t max_pixels) {
    const Certificate cert = load(path);
    const std::vector<double>* phi = cert.metric ? &cert.metric->phi : nullptr;
    if (cert.boxes.empty()) std::cerr << "warning: empty model, writing a blank image\n";
    write_atomically(image, [&](std::ostream& os) { write_pgm(os, render(cert.boxes, phi, max_pixels)); });
    return kExitOk;
}

int cmd_oracle(const std::string& path) {
    const Certificate cert = load(path);
    const MultiplierGraph mg = cert.multiplier_graph();
    const CycleValue mean = min_cycle_mean(mg);
    std::cout.precision(17);
    std::cout << "min cycle mean: " << mean.value << " (length " << mean.cycle.size() << ")\n";
    const CycleValue mult = min_cycle_multiplier(mg);
    std::cout << "min cycle multiplier: " << mult.value << (mult.exact ? "" : " (upper bound)") << " (length "
              << mult.cycle.size() << ")\n";
    if (cert.metric) std::cout << "certified L: " << cert.metric->L << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Box chain hyperbolicity certificates for complex polynomial maps"};
    app.require_subcommand(1);

    RunConfig cfg;
    RunArgs args;
    auto* run = app.add_subcommand("run", "build a model, search for an expansion constant, refine");
    run->add_option("--map", args.family, "quadratic | cubic | general")->check(CLI::IsMember({"quadratic", "cubic", "general"}));
    run->add_option("--c", args.c, "constant term c as RE IM")->expected(2);
    run->add_option("--a", args.a, "cubic critical point a as RE IM")->expected(2);
    run->add_option("--coeffs", args.coeffs, "general map coefficients, ascending, as RE IM pairs")->expected(6, 1 << 20);
    run->add_option("--depth", cfg.depth, "initial box depth")->capture_default_str();
    run->add_option("--max-depth", cfg.max_depth, "maximum box depth")->capture_default_str();
    run->add_option("--coarse-depth", cfg.coarse_depth, "depth of the first pruned grid before uniform refinement")
        ->capture_default_str();
    run->add_option("--l-step", cfg.l_step, "L search step")->capture_default_str();
    run->add_option("--l-hi", args.l_hi, "initial L (default: map degree)");
    run->add_option("--strategy", args.strategy, "uniform | weak-cycle | sink-basin")->capture_default_str();
    run->add_flag("--neighborhood", cfg.weak_cycle_neighborhood, "weak-cycle refinement includes 1-neighborhood");
    run->add_option("--rounds", cfg.rounds, "maximum refinement rounds")->capture_default_str();
    run->add_option("--sink-iterations", cfg.sink_iterations, "sink-basin iteration count")->capture_default_str();
    run->add_option("--sink-bound", cfg.sink_bound, "sink-basin escape bound")->capture_default_str();
    run->add_option("--seed", args.seed, "arborescence root seed");
    run->add_option("--out", cfg.out_dir, "output directory");

    std::string cert_path, image_path;
    std::uint32_t max_pixels = kDefaultMaxPixels;
    auto* verify = app.add_subcommand("verify", "re-verify a certificate from file");
    verify->add_option("certificate", cert_path)->required();
    auto* rend = app.add_subcommand("render", "render a certificate to a PGM image");
    rend->add_option("certificate", cert_path)->required();
    rend->add_option("image", image_path)->required();
    rend->add_option("--max-pixels", max_pixels, "image side cap")->capture_default_str();
    auto* oracle = app.add_subcommand("oracle", "cycle-mean report for a certificate");
    oracle->add_option("certificate", cert_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; usage errors use the input error code.
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        if (*run) return cmd_run(cfg, args);
        if (*verify) return cmd_verify(cert_path);
        if (*rend) return cmd_render(cert_path, image_path, max_pixels);
        if (*oracle) return cmd_oracle(cert_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
