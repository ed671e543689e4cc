#pragma once

#include <filesystem>

#include <Eigen/Sparse>

#include "majkit/majorizers.hpp"
#include "majkit/operators.hpp"
#include "majkit/solvers.hpp"

namespace majkit::ct {

/// Parallel-beam geometry; views uniform over 180 degrees, detector centered
/// on the image with enough extent to cover the support.
struct Geometry {
    Index n = 64;            ///< image side (pixels)
    double pixel_size = 1.0;
    Index n_views = 96;
    Index n_channels = 96;

    Index image_size() const { return n * n; }
    Index sinogram_size() const { return n_views * n_channels; }
    double detector_spacing() const;
    void validate() const;
};

/// Line-length (Siddon) parallel-beam projector with exact-transpose
/// back-projector.
OpPtr build_projector(const Geometry& geom);

/// Real-valued sparse system matrix behind a projector operator.
const Eigen::SparseMatrix<double>& projector_matrix(const LinearOperator& op);

/// Stacked [A_down; I] with the downsampled projector spanning the same
/// angular range and detector extent at reduced sampling.
OpPtr downsampled_K(const Geometry& geom_full, double view_factor,
                    double channel_factor, Geometry* geom_down_out = nullptr);

struct RegularizerParams {
    double delta = 0.1;     ///< hyperbola transition point
    double strength = 1.0;  ///< multiplier on the potential sum
};

/// Edge-preserving hyperbola regularizer over horizontal+vertical neighbor
/// differences: R(x) = strength * sum delta^2 (sqrt(1 + (diff/delta)^2) - 1).
double regularizer_value(const RVec& x, Index n, const RegularizerParams& params);
RVec regularizer_gradient(const RVec& x, Index n, const RegularizerParams& params);
/// C^T C x for the difference operator (quadratic curvature bound is
/// strength per difference, i.e. strength * C^T C overall).
RVec difference_gram_apply(const RVec& x, Index n);

struct CTProblem {
    Geometry geom;
    OpPtr A;
    RVec y;       ///< sinogram
    RVec w;       ///< statistical weights, > 0
    RegularizerParams reg;

    void validate() const;
};

struct ADMMState {
    RVec x;       ///< image
    RVec u;       ///< sinogram-domain split variable
    RVec e;       ///< scaled dual variable
    double gamma = 1.0;
};

/// u_i = (w_i y_i + gamma (Ax + e)_i) / (w_i + gamma)
RVec admm_u_update(const ADMMState& s, const RVec& ax, const RVec& y, const RVec& w);

struct XUpdateResult {
    RVec x;
    double surrogate_decrease = 0.0;  ///< >= 0; increase is a hard failure
};

/// Majorized x-update: cg_iters CG steps on the quadratic surrogate around
/// x^{(n)} with R's curvature bounded by strength * C^T C.
XUpdateResult admm_x_update(const CTProblem& prob, const ADMMState& s,
                            const MajorizerSpec& M, const RVec& u_new,
                            int cg_iters = 5);

/// e <- e + A x_new - u_new
RVec admm_dual_update(const ADMMState& s, const RVec& ax_new, const RVec& u_new);

/// Full data-fit + regularizer cost 1/2 ||Ax - y||_W^2 + R(x).
double ct_cost(const CTProblem& prob, const RVec& x);

struct CTTraceRecord {
    int iter;
    double cost;
    double consensus_residual;  ///< ||Ax - u||
};

struct CTResult {
    RVec image;
    std::vector<CTTraceRecord> trace;
};

/// ADMM loop with Gamma = median(w) I and majorized x-updates. M must be
/// certified against A^T Gamma A before calling (checked by the caller).
CTResult ct_reconstruct(const CTProblem& prob, const MajorizerSpec& M,
                        int outer_iters, const RVec& x0, int cg_iters = 5);

/// Hann-apodized ramp-filtered back-projection, least-squares rescaled
/// against the sinogram; used only as the ADMM start image.
RVec fbp(const Geometry& geom, const OpPtr& A, const RVec& sinogram);

/// Concentric-ellipse phantom on an n x n grid, values in [0, 1].
RVec phantom(Index n);

struct SimulatedScan {
    RVec y;       ///< noisy sinogram
    RVec y_clean;
    RVec w;       ///< statistical weights in [0.05, 1]
    RVec x_true;
};

/// Noisy parallel-beam scan: weights exp(-Ax) rescaled to [0.05, 1], Gaussian
/// noise with per-ray variance noise_level^2 / w_i.
SimulatedScan simulate_scan(const Geometry& geom, const OpPtr& A,
                            double noise_level, std::uint64_t seed);

Geometry geometry_from_config(const std::filesystem::path& config);

}  // namespace majkit::ct
