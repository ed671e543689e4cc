#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "majkit/ct.hpp"
#include "majkit/dual_design.hpp"
#include "majkit/solvers.hpp"

namespace majkit::experiments {

namespace fs = std::filesystem;

/// Weighted Toeplitz matrix F_ij = (0.1 + cos^2(2 pi i / N)) / sqrt(1 + |i-j|).
RMat weighted_toeplitz(Index n);

/// Parse an H source: a Matrix Market path or a named generator
/// ("diag:1..8", "diag:v1,v2,...", "toeplitz:N=128" which yields F^T F).
HermPtr parse_h_source(const std::string& source, Index* dim_out = nullptr);

struct ToeplitzArm {
    std::string name;
    MajorizerSpec majorizer;
    ConvergenceTrace trace;
    RVec spectrum;
    int iters_to_tol = -1;      ///< first iter with relative distance <= 1e-6
    double spectrum_spread = 0; ///< lambda_max - lambda_min of the majorized spectrum
    double min_eig = 0.0;       ///< verification lambda_min(M - H)
};

struct ToeplitzConfig {
    Index n = 128;
    int mm_iters = 50000;
    int design_iters = 3000;
    std::uint64_t seed = 0;
    double distance_tol = 1e-6;
    fs::path out_dir;           ///< empty: no files written
};

/// The weighted-Toeplitz MM comparison: Lipschitz, SQS, Design-Diag,
/// Design-Circ+Diag and beta-scaled Circ majorizers, MM convergence traces,
/// majorized spectra and an iterations-to-tolerance summary.
std::vector<ToeplitzArm> toeplitz_experiment(const ToeplitzConfig& cfg);

struct CtDemoConfig {
    ct::Geometry geom;          ///< defaults 64x64, 96 views, 96 channels
    int outer_iters = 64;
    /// Per-arm dual-ascent budgets: the DFT-structured design converges
    /// orders of magnitude faster per iteration than the stacked
    /// downsampled-Gram design, so a shared budget leaves one arm either
    /// unverifiable or fully saturated while the other is still far away.
    int circ_design_iters = 384;
    int down_design_iters = 16384;
    int cg_iters = 5;
    std::uint64_t seed = 0;
    double noise_level = 0.3;
    ct::RegularizerParams reg{0.02, 2.0};
    double view_factor = 12.0;
    double channel_factor = 7.0;
    CertMode cert_mode = CertMode::Power;
    fs::path out_dir;
    VerifyMode verify_mode = VerifyMode::Dense;
};

struct CtDemoArm {
    std::string name;
    MajorizerSpec majorizer;
    ct::CTResult result;
    double final_cost = 0.0;
    double min_eig = 0.0;
};

struct CtDemoResult {
    ct::CTProblem problem;
    RVec x_fbp;
    std::vector<CtDemoArm> arms;  ///< SQS, Circ, Down
};

/// ADMM reconstruction comparison with SQS, designed-circulant and
/// downsampled-Gram majorizers, all verified against A^T Gamma A first.
CtDemoResult ct_demo(const CtDemoConfig& cfg);

void write_trace_csv(const fs::path& path, const ConvergenceTrace& trace);
void write_design_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace);
void write_ct_trace_csv(const fs::path& path, const std::vector<ct::CTTraceRecord>& trace);
void write_spectrum_csv(const fs::path& path, const RVec& spectrum);

CtDemoConfig ct_demo_config_from_file(const fs::path& config);

}  // namespace majkit::experiments
