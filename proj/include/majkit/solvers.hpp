#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "majkit/majorizers.hpp"
#include "majkit/operators.hpp"

namespace majkit {

struct QuadraticProblem {
    HermPtr H;   ///< PSD quadratic term
    CVec g;      ///< linear term
    CVec x0;     ///< start iterate
};

struct ConvergenceRecord {
    int iter;
    double distance;  ///< ||x - x*|| when a reference is available, else NaN
    double cost;      ///< 1/2 x^H H x + Re(x^H g)
};

using ConvergenceTrace = std::vector<ConvergenceRecord>;

struct CgResult {
    CVec x;
    double residual = 0.0;  ///< ||A x - b|| / max(||b||, eps)
    int iters = 0;
    bool converged = false;
};

/// Standard (preconditioned) conjugate gradients on a PSD operator.
/// Aborts with a diagnostic on detected negative curvature.
CgResult conjugate_gradient(const HermitianOperator& A, const CVec& b,
                            const CVec& x0, int iters, double tol,
                            const std::function<CVec(const CVec&)>* precond = nullptr);

struct SolveMResult {
    CVec z;
    double residual = 0.0;
    bool exact = false;  ///< structure admitted a direct solve
    int cg_iters = 0;
};

/// z = M^{-1} r, dispatched on K's structure: diagonal/identity K solves
/// elementwise, unitary K solves in the transform domain, stacked K runs
/// preconditioned CG (circulant part if present, else the diagonal part).
SolveMResult solve_M(const MajorizerSpec& M, const CVec& r, int inner_iters = 100,
                     double tol = 1e-10);

/// x_{n+1} = x_n - M^{-1}(H x_n + g). Throws if the cost increases beyond
/// roundoff with a certified M (falsifies majorization). With x_star given
/// and stop_rel_distance > 0, stops early once ||x - x*|| drops below that
/// fraction of the initial distance.
ConvergenceTrace mm_quadratic(const QuadraticProblem& q, const MajorizerSpec& M,
                              int iters, const std::optional<CVec>& x_star = std::nullopt,
                              int inner_iters = 100, double stop_rel_distance = 0.0);

/// Sorted eigenvalues of M^{-1/2} H M^{-1/2} (dense, desk scale).
RVec majorized_spectrum(const MajorizerSpec& M, const HermitianOperator& H,
                        Index cap = kDefaultMaterializeCap);

}  // namespace majkit
