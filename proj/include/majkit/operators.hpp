#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace majkit {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

enum class OpKind {
    Dense,
    Diagonal,
    Circulant,
    Dft,
    Stacked,
    Composed,
    GramWeighted,
    Projector,
};

std::string to_string(OpKind kind);

/// Matrix-free complex linear map. Implementations are immutable after
/// construction; apply/adjoint_apply are pure and safe to call concurrently.
/// The public entry points validate dimensions before dispatching.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    virtual Index rows() const = 0;
    virtual Index cols() const = 0;
    virtual OpKind kind() const = 0;

    /// y = A x, length(x) == cols().
    CVec apply(const CVec& x) const;
    /// x = A^H y, length(y) == rows().
    CVec adjoint_apply(const CVec& y) const;

protected:
    virtual CVec do_apply(const CVec& x) const = 0;
    virtual CVec do_adjoint_apply(const CVec& y) const = 0;
};

using OpPtr = std::shared_ptr<const LinearOperator>;

/// Hermitian map H = H^H of dimension dim(). x^H H x is real for all x.
class HermitianOperator {
public:
    virtual ~HermitianOperator() = default;
    virtual Index dim() const = 0;
    CVec apply(const CVec& x) const;

protected:
    virtual CVec do_apply(const CVec& x) const = 0;
};

using HermPtr = std::shared_ptr<const HermitianOperator>;

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

OpPtr make_dense(CMat A);
OpPtr make_dense(const RMat& A);
/// Diagonal operator; identity(n) == make_diagonal(ones(n)).
OpPtr make_diagonal(CVec diag);
OpPtr make_diagonal(const RVec& diag);
OpPtr make_identity(Index n);
/// Circulant operator from its first column; applied via FFT.
OpPtr make_circulant(CVec first_column);
/// Unitary 1-D DFT (1/sqrt(N) normalization on both apply and adjoint).
OpPtr make_dft(Index n);
/// Unitary 2-D DFT acting on row-major raveled rows x cols images.
OpPtr make_dft2(Index rows, Index cols);
/// Vertical stack [A1; A2; ...]; all blocks must share cols().
OpPtr make_stacked(std::vector<OpPtr> blocks);
/// Composition A * B (apply B first).
OpPtr make_composed(OpPtr A, OpPtr B);

/// True when op is exactly the identity map (diagonal of ones).
bool is_identity(const LinearOperator& op);

/// Blocks of a stacked operator (empty if op is not stacked).
const std::vector<OpPtr>& stacked_blocks(const LinearOperator& op);

/// Eigenvalues of a circulant operator in DFT order (throws otherwise).
const CVec& circulant_eigenvalues(const LinearOperator& op);

HermPtr make_dense_hermitian(CMat H);
HermPtr make_dense_hermitian(const RMat& H);
/// Gram operator A^H diag(w) A with w >= 0; applied matrix-free.
HermPtr gram(OpPtr A, RVec w);

/// The operator and weights behind a gram HermitianOperator, or nullptr.
const LinearOperator* gram_factor(const HermitianOperator& H, RVec* weights_out = nullptr);

// ---------------------------------------------------------------------------
// Spectral utilities
// ---------------------------------------------------------------------------

struct PowerIterationResult {
    double value = 0.0;      ///< lambda_max estimate (Rayleigh quotient)
    CVec vector;             ///< unit-norm iterate
    double residual = 0.0;   ///< ||Hv - value*v|| / max(|value|, eps)
    bool converged = false;
    int iters = 0;
};

/// Largest-eigenvalue estimate for a Hermitian operator. The start vector is
/// a seeded unit-norm complex Gaussian; a zero draw is regenerated.
PowerIterationResult power_iteration(const HermitianOperator& H, double tol,
                                     int max_iters, std::uint64_t seed);

/// Dense materialization cap (entries). Throws if rows*cols exceeds cap.
inline constexpr Index kDefaultMaterializeCap = Index(4096) * Index(4096);

CMat materialize(const LinearOperator& op, Index cap = kDefaultMaterializeCap);
CMat materialize(const HermitianOperator& op, Index cap = kDefaultMaterializeCap);

/// Seeded unit-norm complex Gaussian vector (Box-Muller independent draws
/// for real and imaginary parts).
CVec random_complex_gaussian(Index n, std::uint64_t seed, bool unit_norm = true);

namespace detail {
void check_finite(const CVec& x, const char* what);
[[noreturn]] void dimension_error(const char* what, Index expected, Index got);
}  // namespace detail

}  // namespace majkit
