#include "majkit/dual_design.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Eigenvalues>

#include "majkit/solvers.hpp"

namespace majkit {

void DesignProblem::validate() const {
    if (!H || !K) throw std::invalid_argument("design problem: missing H or K");
    if (K->cols() != H->dim()) {
        throw std::invalid_argument("design problem: cols(K) != dim(H)");
    }
    if (w.size() != K->rows()) {
        detail::dimension_error("design weights", K->rows(), w.size());
    }
    if (w.minCoeff() <= 0.0) {
        throw std::invalid_argument("design problem: weights must be positive");
    }
}

DesignProblem make_design_problem(HermPtr H, OpPtr K, RVec w) {
    DesignProblem p;
    p.H = std::move(H);
    p.K = std::move(K);
    p.w = w.size() ? std::move(w) : RVec(RVec::Ones(p.K->rows()));
    p.validate();
    return p;
}

CertMode cert_mode_from_string(const std::string& s) {
    if (s == "power") return CertMode::Power;
    if (s == "factor3") return CertMode::Factor3;
    if (s == "none") return CertMode::None;
    throw std::invalid_argument("unknown cert mode: " + s);
}

std::string to_string(CertMode m) {
    switch (m) {
        case CertMode::Power: return "power";
        case CertMode::Factor3: return "factor3";
        case CertMode::None: return "none";
    }
    return "none";
}

double dual_value(const DesignProblem& p, const CVec& x) {
    CVec kx = p.K->apply(x);
    RVec kx2 = kx.cwiseAbs2();
    double penalty = (kx2.array().square() / p.w.array()).sum();
    double quad = std::real(x.dot(p.H->apply(x)));
    return -0.5 * penalty + quad;
}

CVec dual_gradient(const DesignProblem& p, const CVec& x) {
    CVec kx = p.K->apply(x);
    CVec weighted = (kx.cwiseAbs2().array() / p.w.array()).matrix().cast<Complex>();
    weighted.array() *= kx.array();
    return 2.0 * (p.H->apply(x) - p.K->adjoint_apply(weighted));
}

double LineSearchPolynomial::dual_gain(double alpha, const RVec& w_inv) const {
    auto dot = [&](const RVec& a, const RVec& b) {
        return (a.array() * w_inv.array() * b.array()).sum();
    };
    double s01 = dot(v0, v1), s02 = dot(v0, v2), s11 = dot(v1, v1);
    double s12 = dot(v1, v2), s22 = dot(v2, v2);
    double a2 = alpha * alpha;
    return alpha * (b1 - s01) + a2 * (b2 - 0.5 * s11 - s02) -
           alpha * a2 * s12 - 0.5 * a2 * a2 * s22;
}

LineSearchPolynomial line_search_coefficients(const DesignProblem& p,
                                              const CVec& x, const CVec& g) {
    if (g.norm() == 0.0) {
        throw std::invalid_argument("line_search_coefficients: zero search direction");
    }
    CVec kx = p.K->apply(x);
    CVec kg = p.K->apply(g);

    LineSearchPolynomial ls;
    ls.v2 = kg.cwiseAbs2();
    ls.v1 = 2.0 * (kg.array() * kx.array().conjugate()).real();
    ls.v0 = kx.cwiseAbs2();
    ls.b2 = std::real(g.dot(p.H->apply(g)));
    ls.b1 = 2.0 * std::real(g.dot(p.H->apply(x)));

    RVec w_inv = p.w.cwiseInverse();
    auto dot = [&](const RVec& a, const RVec& b) {
        return (a.array() * w_inv.array() * b.array()).sum();
    };
    ls.c3 = 2.0 * dot(ls.v2, ls.v2);
    ls.c2 = 3.0 * dot(ls.v1, ls.v2);
    ls.c1 = 2.0 * dot(ls.v0, ls.v2) + dot(ls.v1, ls.v1) - 2.0 * ls.b2;
    ls.c0 = dot(ls.v0, ls.v1) - ls.b1;
    return ls;
}

std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
    if (scale == 0.0) {
        throw std::invalid_argument("cubic_real_roots: zero polynomial");
    }
    // Drop negligible leading coefficients relative to the largest one.
    const double drop = 1e-14 * scale;
    std::vector<double> coeffs;  // highest degree first
    if (std::abs(c3) > drop) coeffs = {c3, c2, c1, c0};
    else if (std::abs(c2) > drop) coeffs = {c2, c1, c0};
    else if (std::abs(c1) > drop) coeffs = {c1, c0};
    else return {};  // constant nonzero polynomial: no roots

    std::vector<double> roots;
    const size_t deg = coeffs.size() - 1;
    if (deg == 1) {
        roots.push_back(-coeffs[1] / coeffs[0]);
    } else if (deg == 2) {
        double a = coeffs[0], b = coeffs[1], c = coeffs[2];
        double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            // Numerically stable quadratic roots.
            double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            roots.push_back(q / a);
            if (q != 0.0) roots.push_back(c / q);
            else roots.push_back(0.0);
        }
    } else {
        // Companion-matrix eigenvalues, then a Newton polish.
        double a = coeffs[0];
        Eigen::Matrix3d comp = Eigen::Matrix3d::Zero();
        comp(0, 0) = -coeffs[1] / a;
        comp(0, 1) = -coeffs[2] / a;
        comp(0, 2) = -coeffs[3] / a;
        comp(1, 0) = 1.0;
        comp(2, 1) = 1.0;
        Eigen::EigenSolver<Eigen::Matrix3d> es(comp);
        for (int i = 0; i < 3; ++i) {
            Complex r = es.eigenvalues()[i];
            double mag = std::max(1.0, std::abs(r));
            if (std::abs(r.imag()) > 1e-9 * mag) continue;
            double root = r.real();
            for (int it = 0; it < 3; ++it) {
                double p = ((c3 * root + c2) * root + c1) * root + c0;
                double dp = (3.0 * c3 * root + 2.0 * c2) * root + c1;
                if (dp == 0.0) break;
                root -= p / dp;
            }
            roots.push_back(root);
        }
    }
    // Verify residuals and deduplicate.
    std::vector<double> out;
    for (double r : roots) {
        double p = ((c3 * r + c2) * r + c1) * r + c0;
        double bound = 1e-8 * scale * (1.0 + std::abs(r) * std::abs(r) * std::abs(r));
        if (std::abs(p) > bound) continue;
        bool dup = false;
        for (double o : out) {
            if (std::abs(o - r) <= 1e-12 * (1.0 + std::abs(o))) dup = true;
        }
        if (!dup) out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    return out;
}

AscentState make_initial_state(const DesignProblem& p, std::uint64_t seed) {
    AscentState s;
    s.x = random_complex_gaussian(p.dim(), seed);
    s.dual_value = dual_value(p, s.x);
    s.grad_norm = dual_gradient(p, s.x).norm();
    s.iter = 0;
    return s;
}

AscentState ascent_step(const DesignProblem& p, const AscentState& s) {
    CVec g = dual_gradient(p, s.x);
    double gnorm = g.norm();
    AscentState next = s;
    next.iter = s.iter + 1;
    if (gnorm == 0.0) {
        next.stagnated = true;
        next.grad_norm = 0.0;
        return next;
    }
    LineSearchPolynomial ls = line_search_coefficients(p, s.x, g);
    std::vector<double> roots = cubic_real_roots(ls.c3, ls.c2, ls.c1, ls.c0);

    RVec w_inv = p.w.cwiseInverse();
    double best_alpha = 0.0;
    double best_gain = 0.0;
    for (double r : roots) {
        double gain = ls.dual_gain(r, w_inv);
        if (gain > best_gain) {
            best_gain = gain;
            best_alpha = r;
        }
    }
    if (best_alpha == 0.0 || best_gain <= 0.0) {
        next.stagnated = true;
        next.grad_norm = gnorm;
        return next;
    }
    next.x = s.x + best_alpha * g;
    next.dual_value = dual_value(p, next.x);
    next.grad_norm = dual_gradient(p, next.x).norm();
    next.stagnated = false;
    return next;
}

namespace {

RVec recover_primal(const DesignProblem& p, const CVec& x) {
    CVec kx = p.K->apply(x);
    return (kx.cwiseAbs2().array() / p.w.array()).matrix();
}

// Generalized power iteration for lambda_max(M^{-1} H) when M lacks an exact
// inverse square root but solve_M can invert it (stacked K, d > 0). The
// Rayleigh quotient (z^H H z)/(z^H M z) converges monotonically from below
// for the iteration z <- M^{-1} H z.
double power_scale_via_solve(const MajorizerSpec& M, const HermitianOperator& H,
                             double tol, std::uint64_t seed) {
    CVec z = random_complex_gaussian(H.dim(), seed);
    double lambda = 0.0;
    bool converged = false;
    for (int it = 0; it < 10000; ++it) {
        CVec hz = H.apply(z);
        double num = std::real(z.dot(hz));
        double den = std::real(z.dot(M.apply(z)));
        double next = num / std::max(den, 1e-300);
        if (it > 0 && std::abs(next - lambda) <= tol * 1e-2 * std::abs(next)) {
            lambda = next;
            converged = true;
            break;
        }
        lambda = next;
        z = solve_M(M, hz, 400, 1e-12).z;
        double nrm = z.norm();
        if (nrm == 0.0) z = random_complex_gaussian(H.dim(), seed + it + 1);
        else z /= nrm;
    }
    double scale = (1.0 + tol) * lambda;
    if (!converged) scale *= 1.0 + tol;
    return std::max(scale, 1e-12);
}

// solve_M can invert a stacked majorizer iff some transform-exact block
// (DFT or diagonal) carries strictly positive weights; the remaining blocks
// only add PSD terms, so zero weights there (e.g. rays that miss the image)
// are harmless.
bool stacked_solvable(const MajorizerSpec& M) {
    if (M.K->kind() != OpKind::Stacked) return false;
    Index off = 0;
    for (const auto& b : stacked_blocks(*M.K)) {
        if ((b->kind() == OpKind::Dft || b->kind() == OpKind::Diagonal) &&
            M.d.segment(off, b->rows()).minCoeff() > 0.0) {
            return true;
        }
        off += b->rows();
    }
    return false;
}

Certification certify(const DesignProblem& p, MajorizerSpec& M,
                      const DesignConfig& cfg) {
    Certification cert;
    CertMode mode = cfg.cert_mode;
    bool stacked_power = false;
    if (mode == CertMode::Power) {
        if (has_invertible_structure(M)) {
            // exact inverse square root path below
        } else if (stacked_solvable(M)) {
            stacked_power = true;
        } else {
            // No usable inverse; fall back to the loose scaling.
            cert.power_fallback = true;
            mode = CertMode::Factor3;
        }
    }
    switch (mode) {
        case CertMode::Power: {
            if (stacked_power) {
                M.alpha = power_scale_via_solve(M, *p.H, cfg.cert_tol, cfg.seed + 7919);
                M.certified = true;
                M.method = CertMethod::PowerIteration;
            } else {
                M = scale_to_majorize(M, *p.H, cfg.cert_tol, cfg.seed + 7919);
            }
            cert.method = CertMethod::PowerIteration;
            cert.alpha = M.alpha;
            break;
        }
        case CertMode::Factor3: {
            M.alpha = 3.0;
            M.certified = true;
            M.method = CertMethod::Factor3;
            cert.method = CertMethod::Factor3;
            cert.alpha = 3.0;
            break;
        }
        case CertMode::None: {
            M.alpha = 1.0;
            M.certified = false;
            M.method = CertMethod::None;
            cert.method = CertMethod::None;
            cert.alpha = 1.0;
            break;
        }
    }
    return cert;
}

}  // namespace

DesignResult design(const DesignProblem& p, const DesignConfig& cfg) {
    p.validate();
    if (cfg.iters < 1) throw std::invalid_argument("design: iters must be >= 1");

    DesignResult best;
    bool have_best = false;
    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        std::uint64_t seed = cfg.seed + std::uint64_t(r) * 0x9e3779b97f4a7c15ULL;
        AscentState s = make_initial_state(p, seed);
        DesignResult res;
        res.trace.push_back({s.iter, s.dual_value, s.grad_norm});
        for (int it = 0; it < cfg.iters; ++it) {
            if (s.grad_norm <= cfg.grad_tol * std::max(1.0, s.x.norm())) break;
            AscentState next = ascent_step(p, s);
            if (next.stagnated) {
                s.stagnated = true;
                break;
            }
            s = next;
            res.trace.push_back({s.iter, s.dual_value, s.grad_norm});
        }
        res.final_state = s;
        res.dual_value = s.dual_value;
        if (!have_best || res.dual_value > best.dual_value) {
            best = std::move(res);
            have_best = true;
        }
    }

    MajorizerSpec M;
    M.K = p.K;
    M.d = recover_primal(p, best.final_state.x);
    M.alpha = 1.0;
    best.certification = certify(p, M, cfg);
    best.majorizer = std::move(M);
    return best;
}

VerifyResult verify_majorization(const MajorizerSpec& M, const HermitianOperator& H,
                                 VerifyMode mode, double tol_scale, Index cap) {
    VerifyResult out;
    HermPtr Mh = as_hermitian(M);
    if (mode == VerifyMode::Dense) {
        CMat Md = materialize(*Mh, cap);
        CMat Hd = materialize(H, cap);
        CMat S = Md - Hd;
        S = 0.5 * (S + S.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> es(S, Eigen::EigenvaluesOnly);
        out.min_eig = es.eigenvalues().minCoeff();
        // lambda_max(H) only sets the tolerance scale; a power-iteration
        // estimate avoids a second dense eigendecomposition.
        auto hmax = power_iteration(H, 1e-9, 20000, 99991);
        out.h_lambda_max = hmax.value;
    } else {
        // lambda_min(S) = shift - lambda_max(shift I - S) with shift >= lambda_max(S).
        class Diff final : public HermitianOperator {
        public:
            Diff(const HermitianOperator& m, const HermitianOperator& h,
                 double shift, double sign)
                : m_(m), h_(h), shift_(shift), sign_(sign) {}
            Index dim() const override { return h_.dim(); }
            CVec do_apply(const CVec& x) const override {
                CVec s = m_.apply(x) - h_.apply(x);
                return sign_ * s + shift_ * x;
            }
        private:
            const HermitianOperator& m_;
            const HermitianOperator& h_;
            double shift_, sign_;
        };
        Diff plain(*Mh, H, 0.0, 1.0);
        auto top = power_iteration(plain, 1e-9, 20000, 12345);
        double shift = std::abs(top.value) * 1.5 + 1e-12;
        Diff shifted(*Mh, H, shift, -1.0);
        auto bottom = power_iteration(shifted, 1e-9, 20000, 54321);
        out.min_eig = shift - bottom.value;
        out.residual = bottom.residual;
        auto hmax = power_iteration(H, 1e-9, 20000, 99991);
        out.h_lambda_max = hmax.value;
    }
    out.majorizes = out.min_eig >= -tol_scale * std::max(out.h_lambda_max, 0.0);
    return out;
}

double primal_value(const DesignProblem& p, const RVec& d) {
    return 0.5 * (p.w.array() * d.array().square()).sum();
}

double duality_gap(const DesignProblem& p, const RVec& d, const CVec& x,
                   double feas_tol) {
    if (d.size() != p.K->rows()) {
        detail::dimension_error("duality_gap d", p.K->rows(), d.size());
    }
    MajorizerSpec M;
    M.K = p.K;
    M.d = d;
    M.alpha = 1.0;
    auto v = verify_majorization(M, *p.H, VerifyMode::Dense, feas_tol);
    if (!v.majorizes) return std::numeric_limits<double>::infinity();
    return primal_value(p, d) - dual_value(p, x);
}

}  // namespace majkit
