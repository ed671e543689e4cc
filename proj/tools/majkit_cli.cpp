#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "majkit/dual_design.hpp"
#include "majkit/experiments.hpp"
#include "majkit/io.hpp"
#include "majkit/solvers.hpp"

namespace fs = std::filesystem;
using namespace majkit;

namespace {

fs::path default_out_dir() {
    if (const char* env = std::getenv("MAJKIT_OUT")) return fs::path(env);
    return fs::path("out");
}

int cmd_design(const std::string& h_source, const std::string& k_descriptor,
               const std::string& w_source, int iters, std::uint64_t seed,
               const std::string& cert, const fs::path& out_dir) {
    Index n = 0;
    HermPtr H = experiments::parse_h_source(h_source, &n);
    OpPtr K = io::parse_k_descriptor(k_descriptor, n);
    RVec w = w_source == "uniform" ? RVec(RVec::Ones(K->rows()))
                                   : io::read_real_vector(w_source);
    DesignProblem p = make_design_problem(H, K, w);

    DesignConfig cfg;
    cfg.iters = iters;
    cfg.seed = seed;
    cfg.cert_mode = cert_mode_from_string(cert);
    DesignResult res = design(p, cfg);

    fs::create_directories(out_dir);
    io::write_majorizer(out_dir / "majorizer.txt", res.majorizer, k_descriptor);
    experiments::write_design_trace_csv(out_dir / "design_trace.csv", res.trace);

    std::cout << "dual_value " << res.dual_value << "\n";
    std::cout << "grad_norm " << res.final_state.grad_norm << "\n";
    std::cout << "alpha " << res.certification.alpha << "\n";
    std::cout << "cert " << to_string(res.certification.method) << "\n";
    if (res.certification.power_fallback) {
        std::cerr << "warning: power certification fell back to factor-3 "
                     "(zero entries or unsupported K structure)\n";
    }
    if (cfg.cert_mode != CertMode::None && !res.majorizer.certified) {
        std::cerr << "error: certification requested but not achieved\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const fs::path& majorizer_path, const std::string& h_source,
               const std::string& mode) {
    MajorizerSpec M = io::read_majorizer(majorizer_path);
    HermPtr H = experiments::parse_h_source(h_source);
    VerifyMode vm = mode == "lanczos" ? VerifyMode::Lanczos : VerifyMode::Dense;
    if (vm == VerifyMode::Dense &&
        Index(H->dim()) * Index(H->dim()) > kDefaultMaterializeCap) {
        std::cerr << "error: problem too large for dense verification; "
                     "rerun with --mode lanczos\n";
        return 2;
    }
    auto v = verify_majorization(M, *H, vm);
    std::cout << "min_eig " << v.min_eig << "\n";
    std::cout << "h_lambda_max " << v.h_lambda_max << "\n";
    std::cout << (v.majorizes ? "majorizes" : "does-not-majorize") << "\n";
    return v.majorizes ? 0 : 1;
}

int cmd_spectrum(const fs::path& majorizer_path, const std::string& h_source,
                 const fs::path& out_dir) {
    MajorizerSpec M = io::read_majorizer(majorizer_path);
    HermPtr H = experiments::parse_h_source(h_source);
    if (Index(H->dim()) * Index(H->dim()) > kDefaultMaterializeCap) {
        std::cerr << "error: problem too large for dense spectrum computation\n";
        return 2;
    }
    RVec spec = majorized_spectrum(M, *H);
    fs::create_directories(out_dir);
    experiments::write_spectrum_csv(out_dir / "spectrum.csv", spec);
    std::cout << "lambda_min " << spec.minCoeff() << "\n";
    std::cout << "lambda_max " << spec.maxCoeff() << "\n";
    return 0;
}

int cmd_toeplitz(Index n, int iters, std::uint64_t seed, const fs::path& out_dir) {
    experiments::ToeplitzConfig cfg;
    cfg.n = n;
    cfg.design_iters = iters;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    auto arms = experiments::toeplitz_experiment(cfg);
    std::cout << "majorizer iters_to_tol spectrum_spread\n";
    for (const auto& arm : arms) {
        std::cout << arm.name << " " << arm.iters_to_tol << " "
                  << arm.spectrum_spread << "\n";
    }
    return 0;
}

int cmd_ct_demo(const fs::path& config, std::uint64_t seed, const fs::path& out_dir) {
    experiments::CtDemoConfig cfg;
    if (!config.empty()) cfg = experiments::ct_demo_config_from_file(config);
    if (seed != std::uint64_t(-1)) cfg.seed = seed;
    cfg.out_dir = out_dir;
    auto res = experiments::ct_demo(cfg);
    std::cout << "majorizer final_cost min_eig\n";
    for (const auto& arm : res.arms) {
        std::cout << arm.name << " " << arm.final_cost << " " << arm.min_eig << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"majkit: algorithmic majorizer design and MM/ADMM experiments"};
    app.require_subcommand(1);

    std::string h_source, k_descriptor = "identity", w_source = "uniform";
    std::string cert = "factor3", verify_mode = "dense";
    std::string config;
    int iters = 128;
    std::uint64_t seed = 0;
    Index n = 128;
    fs::path out_dir = default_out_dir();
    fs::path majorizer_path;

    auto* design_cmd = app.add_subcommand("design", "design a majorizer for H");
    design_cmd->add_option("--H", h_source, "H source: Matrix Market path or generator")
        ->required();
    design_cmd->add_option("--K", k_descriptor, "K descriptor");
    design_cmd->add_option("--W", w_source, "weights file or 'uniform'");
    design_cmd->add_option("--iters", iters, "ascent iteration budget");
    design_cmd->add_option("--seed", seed, "initialization seed");
    design_cmd->add_option("--cert", cert, "certification: power|factor3|none");
    design_cmd->add_option("--out", out_dir, "output directory");

    auto* verify_cmd = app.add_subcommand("verify", "check M >= H");
    verify_cmd->add_option("--majorizer", majorizer_path, "majorizer sidecar file")
        ->required();
    verify_cmd->add_option("--H", h_source, "H source")->required();
    verify_cmd->add_option("--mode", verify_mode, "dense|lanczos");

    auto* spectrum_cmd = app.add_subcommand("spectrum",
                                            "eigenvalues of M^{-1/2} H M^{-1/2}");
    spectrum_cmd->add_option("--majorizer", majorizer_path, "majorizer sidecar file")
        ->required();
    spectrum_cmd->add_option("--H", h_source, "H source")->required();
    spectrum_cmd->add_option("--out", out_dir, "output directory");

    auto* toeplitz_cmd = app.add_subcommand("toeplitz",
                                            "weighted-Toeplitz MM comparison");
    toeplitz_cmd->add_option("--N", n, "matrix dimension");
    toeplitz_cmd->add_option("--iters", iters, "design iteration budget")
        ->default_val(3000);
    toeplitz_cmd->add_option("--seed", seed, "seed");
    toeplitz_cmd->add_option("--out", out_dir, "output directory");

    auto* ct_cmd = app.add_subcommand("ct-demo", "toy CT ADMM comparison");
    ct_cmd->add_option("--config", config, "plain-text key=value config");
    std::uint64_t ct_seed = std::uint64_t(-1);
    ct_cmd->add_option("--seed", ct_seed, "seed override");
    ct_cmd->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (design_cmd->parsed()) {
            return cmd_design(h_source, k_descriptor, w_source, iters, seed, cert, out_dir);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(majorizer_path, h_source, verify_mode);
        }
        if (spectrum_cmd->parsed()) {
            return cmd_spectrum(majorizer_path, h_source, out_dir);
        }
        if (toeplitz_cmd->parsed()) {
            return cmd_toeplitz(n, iters, seed, out_dir);
        }
        if (ct_cmd->parsed()) {
            return cmd_ct_demo(config, ct_seed, out_dir);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
