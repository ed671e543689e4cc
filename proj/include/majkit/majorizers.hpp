#pragma once

#include "majkit/operators.hpp"

namespace majkit {

enum class CertMethod { None, PowerIteration, Factor3, Analytic };

std::string to_string(CertMethod m);
CertMethod cert_method_from_string(const std::string& s);

/// M = alpha * K^H diag(d) K with d >= 0 elementwise.
struct MajorizerSpec {
    OpPtr K;
    RVec d;
    double alpha = 1.0;
    bool certified = false;
    CertMethod method = CertMethod::None;

    Index dim() const { return K->cols(); }

    /// alpha * K^H (d .* (K x))
    CVec apply(const CVec& x) const;
};

/// View a MajorizerSpec as a HermitianOperator (shares K and d).
HermPtr as_hermitian(const MajorizerSpec& M);

/// M = lambda_max(H) * I with a (1+tol) safety inflation of the
/// power-iteration estimate. If power iteration fails to converge the
/// safety factor is doubled.
MajorizerSpec lipschitz_majorizer(const HermitianOperator& H, double tol,
                                  std::uint64_t seed);

/// Diagonal separable-surrogate majorizer d_j = sum_i |H_ij|. With
/// nonnegative_hint the fast path d = H*1 is used (one matvec); a probed
/// negative entry under the hint is a hard error since the fast path would
/// under-majorize.
MajorizerSpec sqs_majorizer(const HermitianOperator& H,
                            bool nonnegative_hint = false,
                            Index materialize_cap = kDefaultMaterializeCap);

/// Frobenius-best circulant approximation of a square matrix via
/// wrapped-diagonal averaging: c_k = (1/N) sum_j T_{(j+k) mod N, j}.
OpPtr best_circulant_approx(const CMat& T);

/// Circulant operator re-expressed as a MajorizerSpec with unitary DFT K
/// and d the (real) circulant eigenvalues. Throws if the eigenvalues have a
/// significant imaginary part or are negative.
MajorizerSpec circulant_as_majorizer(const OpPtr& circ);

/// alpha <- alpha0 * (1+tol) * lambda_max(M0^{-1/2} H M0^{-1/2}) by power
/// iteration on the symmetrized operator. Requires invertible structure
/// (identity or unitary K with d > 0).
MajorizerSpec scale_to_majorize(const MajorizerSpec& M0, const HermitianOperator& H,
                                double tol, std::uint64_t seed);

/// True when M admits an exact inverse square root (identity or unitary K
/// with strictly positive d).
bool has_invertible_structure(const MajorizerSpec& M);

/// x -> M^{-1/2} x for invertible-structure M.
CVec apply_inverse_sqrt(const MajorizerSpec& M, const CVec& x);

}  // namespace majkit
