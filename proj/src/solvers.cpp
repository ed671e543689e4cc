#include "majkit/solvers.hpp"

#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

namespace majkit {

CgResult conjugate_gradient(const HermitianOperator& A, const CVec& b,
                            const CVec& x0, int iters, double tol,
                            const std::function<CVec(const CVec&)>* precond) {
    if (b.size() != A.dim()) detail::dimension_error("cg b", A.dim(), b.size());
    if (x0.size() != A.dim()) detail::dimension_error("cg x0", A.dim(), x0.size());

    CgResult out;
    CVec x = x0;
    CVec r = b - A.apply(x);
    const double bnorm = std::max(b.norm(), 1e-300);
    CVec z = precond ? (*precond)(r) : r;
    CVec p = z;
    double rz = std::real(r.dot(z));
    for (int it = 0; it < iters; ++it) {
        if (r.norm() / bnorm <= tol) {
            out.converged = true;
            break;
        }
        CVec ap = A.apply(p);
        double pap = std::real(p.dot(ap));
        if (pap <= 0.0) {
            if (p.norm() > 0.0 && pap < -1e-12 * p.squaredNorm()) {
                throw std::runtime_error("conjugate_gradient: negative curvature "
                                         "detected (operator not PSD)");
            }
            break;  // zero-curvature direction, cannot make progress
        }
        double step = rz / pap;
        x += step * p;
        r -= step * ap;
        z = precond ? (*precond)(r) : r;
        double rz_new = std::real(r.dot(z));
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        out.iters = it + 1;
    }
    out.residual = (b - A.apply(x)).norm() / bnorm;
    if (out.residual <= tol) out.converged = true;
    out.x = std::move(x);
    return out;
}

namespace {

class MajorizerApply final : public HermitianOperator {
public:
    explicit MajorizerApply(const MajorizerSpec& M) : M_(M) {}
    Index dim() const override { return M_.dim(); }
    CVec do_apply(const CVec& x) const override { return M_.apply(x); }

private:
    const MajorizerSpec& M_;
};

// Spectrum of the "easy" sub-majorizer formed from one block of a stacked K;
// used as a CG preconditioner for M z = r.
std::function<CVec(const CVec&)> stacked_preconditioner(const MajorizerSpec& M) {
    const auto& blocks = stacked_blocks(*M.K);
    Index off = 0;
    // Prefer a unitary (DFT) block: exactly invertible in the transform domain.
    for (const auto& b : blocks) {
        if (b->kind() == OpKind::Dft) {
            RVec d = M.d.segment(off, b->rows());
            double floor = std::max(1e-12, 1e-8 * d.maxCoeff());
            RVec inv = (M.alpha * d.cwiseMax(floor)).cwiseInverse();
            OpPtr K = b;
            return [K, inv](const CVec& r) {
                CVec kr = K->apply(r);
                kr.array() *= inv.array();
                return CVec(K->adjoint_apply(kr));
            };
        }
        off += b->rows();
    }
    off = 0;
    for (const auto& b : blocks) {
        if (b->kind() == OpKind::Diagonal) {
            RVec d = M.d.segment(off, b->rows());
            double floor = std::max(1e-12, 1e-8 * (d.maxCoeff() + 1e-300));
            RVec inv = (M.alpha * d.cwiseMax(floor)).cwiseInverse();
            return [inv](const CVec& r) { return CVec(inv.asDiagonal() * r); };
        }
        off += b->rows();
    }
    return {};
}

}  // namespace

SolveMResult solve_M(const MajorizerSpec& M, const CVec& r, int inner_iters,
                     double tol) {
    if (r.size() != M.dim()) detail::dimension_error("solve_M", M.dim(), r.size());
    SolveMResult out;

    if (is_identity(*M.K) || M.K->kind() == OpKind::Diagonal) {
        RVec diag = M.alpha * M.d;
        if (!is_identity(*M.K)) {
            CVec ke = M.K->apply(CVec::Ones(M.dim()));
            diag.array() *= ke.array().abs2();
        }
        if (diag.minCoeff() <= 0.0) {
            throw std::invalid_argument("solve_M: singular diagonal majorizer");
        }
        out.z = r.cwiseQuotient(diag.cast<Complex>());
        out.exact = true;
        return out;
    }
    if (M.K->kind() == OpKind::Dft) {
        if (M.d.minCoeff() <= 0.0) {
            throw std::invalid_argument("solve_M: singular transform-domain majorizer");
        }
        CVec kr = M.K->apply(r);
        kr.array() /= (M.alpha * M.d.array());
        out.z = M.K->adjoint_apply(kr);
        out.exact = true;
        return out;
    }

    // Stacked (circ+diag, projector+identity): preconditioned CG on M z = r.
    MajorizerApply A(M);
    auto precond = stacked_preconditioner(M);
    CgResult cg = conjugate_gradient(A, r, CVec::Zero(M.dim()), inner_iters, tol,
                                     precond ? &precond : nullptr);
    out.z = std::move(cg.x);
    out.residual = cg.residual;
    out.cg_iters = cg.iters;
    return out;
}

ConvergenceTrace mm_quadratic(const QuadraticProblem& q, const MajorizerSpec& M,
                              int iters, const std::optional<CVec>& x_star,
                              int inner_iters, double stop_rel_distance) {
    if (!M.certified) {
        std::fputs("mm_quadratic: warning: majorizer is not certified\n", stderr);
    }
    auto cost_of = [&](const CVec& x) {
        return 0.5 * std::real(x.dot(q.H->apply(x))) + std::real(x.dot(q.g));
    };
    ConvergenceTrace trace;
    CVec x = q.x0;
    double cost = cost_of(x);
    double cost_scale = std::abs(cost) + q.g.norm() * (x.norm() + 1.0) + 1e-300;
    auto record = [&](int it) {
        double dist = x_star ? (x - *x_star).norm()
                             : std::numeric_limits<double>::quiet_NaN();
        trace.push_back({it, dist, cost});
        return dist;
    };
    double d0 = record(0);
    const double stop_at =
        (x_star && stop_rel_distance > 0.0) ? stop_rel_distance * d0 : -1.0;
    for (int it = 1; it <= iters; ++it) {
        CVec grad = q.H->apply(x) + q.g;
        x -= solve_M(M, grad, inner_iters).z;
        double new_cost = cost_of(x);
        if (M.certified && new_cost > cost + 1e-10 * cost_scale) {
            throw std::runtime_error(
                "mm_quadratic: cost increased under a certified majorizer "
                "(majorization falsified)");
        }
        cost = new_cost;
        double dist = record(it);
        if (stop_at >= 0.0 && dist <= stop_at) break;
    }
    return trace;
}

RVec majorized_spectrum(const MajorizerSpec& M, const HermitianOperator& H,
                        Index cap) {
    HermPtr Mh = as_hermitian(M);
    CMat Md = materialize(*Mh, cap);
    CMat Hd = materialize(H, cap);
    Md = 0.5 * (Md + Md.adjoint()).eval();
    Hd = 0.5 * (Hd + Hd.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<CMat> esm(Md);
    const RVec& evals = esm.eigenvalues();
    double top = evals.cwiseAbs().maxCoeff();
    if (evals.minCoeff() <= 1e-14 * std::max(1.0, top)) {
        throw std::invalid_argument("majorized_spectrum: singular majorizer");
    }
    CMat inv_sqrt = esm.eigenvectors() *
                    evals.array().rsqrt().matrix().asDiagonal() *
                    esm.eigenvectors().adjoint();
    CMat S = inv_sqrt * Hd * inv_sqrt;
    S = 0.5 * (S + S.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<CMat> ess(S, Eigen::EigenvaluesOnly);
    RVec spectrum = ess.eigenvalues();
    std::sort(spectrum.data(), spectrum.data() + spectrum.size());
    return spectrum;
}

}  // namespace majkit
