#pragma once

#include <optional>
#include <vector>

#include "majkit/majorizers.hpp"
#include "majkit/operators.hpp"

namespace majkit {

/// Majorizer design instance: find d >= 0 minimizing (1/2)||d||_W^2 subject
/// to K^H diag(d) K - H being positive semidefinite.
struct DesignProblem {
    HermPtr H;   ///< N x N Hermitian PSD
    OpPtr K;     ///< K x N, full column rank
    RVec w;      ///< strictly positive design weights, length rows(K)

    Index dim() const { return H->dim(); }
    void validate() const;
};

DesignProblem make_design_problem(HermPtr H, OpPtr K, RVec w = RVec());

struct AscentState {
    CVec x;
    double dual_value = 0.0;
    double grad_norm = 0.0;
    int iter = 0;
    bool stagnated = false;
};

/// Coefficients of the exact line-search cubic: d/d(alpha) of
/// L(x + alpha g) equals -(c3 a^3 + c2 a^2 + c1 a + c0).
struct LineSearchPolynomial {
    double c3 = 0.0, c2 = 0.0, c1 = 0.0, c0 = 0.0;
    RVec v0, v1, v2;   ///< |Kx|^2, 2 Re{Kg .* conj(Kx)}, |Kg|^2
    double b1 = 0.0;   ///< 2 Re(g^H H x)
    double b2 = 0.0;   ///< g^H H g

    /// L(x + alpha g) - L(x) in closed form.
    double dual_gain(double alpha, const RVec& w_inv) const;
};

struct TraceRecord {
    int iter;
    double dual_value;
    double grad_norm;
};

struct Certification {
    CertMethod method = CertMethod::None;
    double alpha = 1.0;
    std::optional<double> min_eig_estimate;
    bool power_fallback = false;  ///< power requested but d had zeros
};

struct DesignResult {
    MajorizerSpec majorizer;
    std::vector<TraceRecord> trace;
    Certification certification;
    AscentState final_state;
    double dual_value = 0.0;
};

enum class CertMode { Power, Factor3, None };
CertMode cert_mode_from_string(const std::string& s);
std::string to_string(CertMode m);

struct DesignConfig {
    int iters = 128;
    std::uint64_t seed = 0;
    CertMode cert_mode = CertMode::Factor3;
    double grad_tol = 1e-8;        ///< stop when ||g|| <= grad_tol * max(1, ||x||)
    double cert_tol = 1e-3;        ///< (1+cert_tol) inflation for power certs
    int restarts = 1;              ///< independent seeds; best dual value wins
};

/// L(x) = -1/2 || |Kx|^2 ||^2_{W^{-1}} + x^H H x
double dual_value(const DesignProblem& p, const CVec& x);

/// g = 2 (H x - K^H (W^{-1} |Kx|^2 .* Kx)); the gradient of L over the 2N
/// real coordinates of x (matches finite differences of dual_value).
CVec dual_gradient(const DesignProblem& p, const CVec& x);

LineSearchPolynomial line_search_coefficients(const DesignProblem& p,
                                              const CVec& x, const CVec& g);

/// All real roots of c3 a^3 + c2 a^2 + c1 a + c0, with quadratic/linear
/// fallback when leading coefficients vanish. Throws on the zero polynomial.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

/// One exact-line-search steepest ascent step; picks the real stationary
/// point with the largest dual gain. Sets stagnated when no root improves.
AscentState ascent_step(const DesignProblem& p, const AscentState& s);

AscentState make_initial_state(const DesignProblem& p, std::uint64_t seed);

/// Full design: ascent to budget/stagnation, primal recovery
/// d = W^{-1} |K x|^2, then certification scaling.
DesignResult design(const DesignProblem& p, const DesignConfig& cfg);

enum class VerifyMode { Dense, Lanczos };

struct VerifyResult {
    bool majorizes = false;
    double min_eig = 0.0;
    double h_lambda_max = 0.0;
    double residual = 0.0;  ///< eigensolver residual (lanczos mode)
};

/// Does M - H have lambda_min >= -tol_scale * lambda_max(H)?
/// Dense mode is exact at desk scale; lanczos mode uses shifted power
/// iterations on M - H.
VerifyResult verify_majorization(const MajorizerSpec& M, const HermitianOperator& H,
                                 VerifyMode mode = VerifyMode::Dense,
                                 double tol_scale = 1e-8,
                                 Index cap = kDefaultMaterializeCap);

/// J(d) - L(x) = 1/2 ||d||_W^2 - L(x) when d is feasible (dense check),
/// +inf otherwise.
double duality_gap(const DesignProblem& p, const RVec& d, const CVec& x,
                   double feas_tol = 1e-9);

/// Primal objective J(d) = 1/2 sum_i w_i d_i^2.
double primal_value(const DesignProblem& p, const RVec& d);

}  // namespace majkit
