#include "majkit/majorizers.hpp"

#include <cmath>

namespace majkit {

std::string to_string(CertMethod m) {
    switch (m) {
        case CertMethod::None: return "none";
        case CertMethod::PowerIteration: return "power-iteration";
        case CertMethod::Factor3: return "factor-3";
        case CertMethod::Analytic: return "analytic";
    }
    return "none";
}

CertMethod cert_method_from_string(const std::string& s) {
    if (s == "none") return CertMethod::None;
    if (s == "power-iteration" || s == "power") return CertMethod::PowerIteration;
    if (s == "factor-3" || s == "factor3") return CertMethod::Factor3;
    if (s == "analytic") return CertMethod::Analytic;
    throw std::invalid_argument("unknown certification method: " + s);
}

CVec MajorizerSpec::apply(const CVec& x) const {
    CVec kx = K->apply(x);
    kx.array() *= d.array();
    return alpha * K->adjoint_apply(kx);
}

namespace {

class MajorizerHermitian final : public HermitianOperator {
public:
    explicit MajorizerHermitian(MajorizerSpec M) : M_(std::move(M)) {}
    Index dim() const override { return M_.dim(); }
    CVec do_apply(const CVec& x) const override { return M_.apply(x); }

private:
    MajorizerSpec M_;
};

}  // namespace

HermPtr as_hermitian(const MajorizerSpec& M) {
    return std::make_shared<MajorizerHermitian>(M);
}

MajorizerSpec lipschitz_majorizer(const HermitianOperator& H, double tol,
                                  std::uint64_t seed) {
    auto pi = power_iteration(H, tol * 1e-2, 10000, seed);
    double safety = 1.0 + tol;
    if (!pi.converged) safety *= 2.0;
    MajorizerSpec M;
    M.K = make_identity(H.dim());
    M.d = RVec::Constant(H.dim(), safety * pi.value);
    M.alpha = 1.0;
    M.certified = true;
    M.method = CertMethod::Analytic;
    return M;
}

MajorizerSpec sqs_majorizer(const HermitianOperator& H, bool nonnegative_hint,
                            Index materialize_cap) {
    const Index n = H.dim();
    RVec d(n);
    if (nonnegative_hint) {
        CVec h1 = H.apply(CVec::Ones(n));
        for (Index j = 0; j < n; ++j) {
            if (h1[j].real() < -1e-12 * std::max(1.0, h1.norm())) {
                throw std::invalid_argument(
                    "sqs_majorizer: nonnegative hint violated (negative row sum)");
            }
            d[j] = h1[j].real();
        }
        // Spot-check the hint on a few entries to catch sign errors early.
        CVec e = CVec::Zero(n);
        for (Index j : {Index(0), n / 2, n - 1}) {
            e[j] = 1.0;
            CVec col = H.apply(e);
            e[j] = 0.0;
            if (col.real().minCoeff() < -1e-10 * std::max(1.0, col.norm())) {
                throw std::invalid_argument(
                    "sqs_majorizer: nonnegative hint violated (probed negative entry)");
            }
        }
    } else {
        // General H needs |H| column sums; O(N) matvecs via basis probes.
        if (Index(n) * Index(n) <= materialize_cap) {
            CMat Hd = materialize(H, materialize_cap);
            d = Hd.cwiseAbs().colwise().sum().real().transpose();
        } else {
            CVec e = CVec::Zero(n);
            for (Index j = 0; j < n; ++j) {
                e[j] = 1.0;
                d[j] = H.apply(e).cwiseAbs().sum();
                e[j] = 0.0;
            }
        }
    }
    MajorizerSpec M;
    M.K = make_identity(n);
    M.d = std::move(d);
    M.alpha = 1.0;
    M.certified = true;
    M.method = CertMethod::Analytic;
    return M;
}

OpPtr best_circulant_approx(const CMat& T) {
    if (T.rows() != T.cols()) {
        throw std::invalid_argument("best_circulant_approx: matrix not square");
    }
    const Index n = T.rows();
    CVec c = CVec::Zero(n);
    for (Index k = 0; k < n; ++k) {
        Complex sum = 0.0;
        for (Index j = 0; j < n; ++j) {
            sum += T((j + k) % n, j);
        }
        c[k] = sum / double(n);
    }
    return make_circulant(std::move(c));
}

MajorizerSpec circulant_as_majorizer(const OpPtr& circ) {
    const CVec& eigs = circulant_eigenvalues(*circ);
    const Index n = eigs.size();
    double scale = eigs.cwiseAbs().maxCoeff();
    if (eigs.imag().cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, scale)) {
        throw std::invalid_argument(
            "circulant_as_majorizer: circulant is not Hermitian (complex spectrum)");
    }
    RVec d = eigs.real();
    if (d.minCoeff() < -1e-10 * std::max(1.0, scale)) {
        throw std::invalid_argument(
            "circulant_as_majorizer: circulant has negative eigenvalues");
    }
    d = d.cwiseMax(0.0);
    MajorizerSpec M;
    M.K = make_dft(n);
    M.d = std::move(d);
    M.alpha = 1.0;
    M.certified = false;
    M.method = CertMethod::None;
    return M;
}

bool has_invertible_structure(const MajorizerSpec& M) {
    if (M.d.size() == 0 || M.d.minCoeff() <= 0.0 || M.alpha <= 0.0) return false;
    return is_identity(*M.K) || M.K->kind() == OpKind::Dft ||
           M.K->kind() == OpKind::Diagonal;
}

CVec apply_inverse_sqrt(const MajorizerSpec& M, const CVec& x) {
    if (!has_invertible_structure(M)) {
        throw std::invalid_argument("apply_inverse_sqrt: majorizer lacks invertible structure");
    }
    RVec scaled = (M.alpha * M.d.array()).rsqrt();
    if (is_identity(*M.K) || M.K->kind() == OpKind::Diagonal) {
        // Diagonal K with |k|=1 assumed only for identity; general diagonal K
        // folds |k|^2 into the scaling.
        if (!is_identity(*M.K)) {
            CVec ke = M.K->apply(CVec::Ones(M.dim()));
            scaled = (M.alpha * M.d.array() * ke.array().abs2()).rsqrt();
        }
        return scaled.cast<Complex>().asDiagonal() * x;
    }
    // Unitary K: M^{-1/2} = K^H diag((alpha d)^{-1/2}) K
    CVec kx = M.K->apply(x);
    kx.array() *= scaled.array();
    return M.K->adjoint_apply(kx);
}

namespace {

class SymmetrizedOperator final : public HermitianOperator {
public:
    SymmetrizedOperator(const MajorizerSpec& M, const HermitianOperator& H)
        : M_(M), H_(H) {}
    Index dim() const override { return H_.dim(); }
    CVec do_apply(const CVec& x) const override {
        return apply_inverse_sqrt(M_, H_.apply(apply_inverse_sqrt(M_, x)));
    }

private:
    const MajorizerSpec& M_;
    const HermitianOperator& H_;
};

}  // namespace

MajorizerSpec scale_to_majorize(const MajorizerSpec& M0, const HermitianOperator& H,
                                double tol, std::uint64_t seed) {
    if (M0.d.size() == 0 || M0.d.minCoeff() <= 0.0) {
        throw std::invalid_argument("scale_to_majorize: singular majorizer (d has "
                                    "nonpositive entries)");
    }
    if (!has_invertible_structure(M0)) {
        throw std::invalid_argument("scale_to_majorize: majorizer lacks invertible structure");
    }
    SymmetrizedOperator sym(M0, H);
    auto pi = power_iteration(sym, tol * 1e-2, 20000, seed);
    double scale = (1.0 + tol) * pi.value;
    if (!pi.converged) scale *= 1.0 + tol;
    scale = std::max(scale, 1e-12);
    MajorizerSpec M = M0;
    M.alpha = M0.alpha * scale;
    M.certified = true;
    M.method = CertMethod::PowerIteration;
    return M;
}

}  // namespace majkit
