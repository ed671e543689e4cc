#include "majkit/operators.hpp"

#include <cmath>
#include <random>

#include <unsupported/Eigen/FFT>

namespace majkit {

std::string to_string(OpKind kind) {
    switch (kind) {
        case OpKind::Dense: return "dense";
        case OpKind::Diagonal: return "diagonal";
        case OpKind::Circulant: return "circulant";
        case OpKind::Dft: return "dft";
        case OpKind::Stacked: return "stacked";
        case OpKind::Composed: return "composed";
        case OpKind::GramWeighted: return "gram-weighted";
        case OpKind::Projector: return "projector";
    }
    return "unknown";
}

namespace detail {

void check_finite(const CVec& x, const char* what) {
    if (!x.allFinite()) {
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    }
}

void dimension_error(const char* what, Index expected, Index got) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(expected) + ", got " +
                                std::to_string(got));
}

}  // namespace detail

CVec LinearOperator::apply(const CVec& x) const {
    if (x.size() != cols()) {
        detail::dimension_error("apply", cols(), x.size());
    }
    return do_apply(x);
}

CVec LinearOperator::adjoint_apply(const CVec& y) const {
    if (y.size() != rows()) {
        detail::dimension_error("adjoint_apply", rows(), y.size());
    }
    return do_adjoint_apply(y);
}

CVec HermitianOperator::apply(const CVec& x) const {
    if (x.size() != dim()) {
        detail::dimension_error("apply (hermitian)", dim(), x.size());
    }
    return do_apply(x);
}

// ---------------------------------------------------------------------------
// Concrete operators
// ---------------------------------------------------------------------------

namespace {

class DenseOp final : public LinearOperator {
public:
    explicit DenseOp(CMat A) : A_(std::move(A)) {}
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    OpKind kind() const override { return OpKind::Dense; }
    CVec do_apply(const CVec& x) const override { return A_ * x; }
    CVec do_adjoint_apply(const CVec& y) const override { return A_.adjoint() * y; }

private:
    CMat A_;
};

class DiagonalOp final : public LinearOperator {
public:
    explicit DiagonalOp(CVec d) : d_(std::move(d)) {
        identity_ = (d_.array() == Complex(1.0, 0.0)).all();
    }
    Index rows() const override { return d_.size(); }
    Index cols() const override { return d_.size(); }
    OpKind kind() const override { return OpKind::Diagonal; }
    CVec do_apply(const CVec& x) const override { return d_.cwiseProduct(x); }
    CVec do_adjoint_apply(const CVec& y) const override {
        return d_.conjugate().cwiseProduct(y);
    }
    bool is_identity() const { return identity_; }
    const CVec& diag() const { return d_; }

private:
    CVec d_;
    bool identity_ = false;
};

CVec fft_forward(const CVec& x) {
    Eigen::FFT<double> fft;
    CVec out(x.size());
    fft.fwd(out, x);
    return out;
}

CVec fft_inverse(const CVec& x) {
    Eigen::FFT<double> fft;
    CVec out(x.size());
    fft.inv(out, x);
    return out;
}

class CirculantOp final : public LinearOperator {
public:
    explicit CirculantOp(CVec first_column)
        : col_(std::move(first_column)), eigs_(fft_forward(col_)) {}
    Index rows() const override { return col_.size(); }
    Index cols() const override { return col_.size(); }
    OpKind kind() const override { return OpKind::Circulant; }
    CVec do_apply(const CVec& x) const override {
        return fft_inverse(eigs_.cwiseProduct(fft_forward(x)));
    }
    CVec do_adjoint_apply(const CVec& y) const override {
        return fft_inverse(eigs_.conjugate().cwiseProduct(fft_forward(y)));
    }
    const CVec& eigenvalues() const { return eigs_; }
    const CVec& first_column() const { return col_; }

private:
    CVec col_;
    CVec eigs_;
};

class DftOp final : public LinearOperator {
public:
    explicit DftOp(Index n) : n_(n), scale_(1.0 / std::sqrt(double(n))) {}
    Index rows() const override { return n_; }
    Index cols() const override { return n_; }
    OpKind kind() const override { return OpKind::Dft; }
    CVec do_apply(const CVec& x) const override { return scale_ * fft_forward(x); }
    CVec do_adjoint_apply(const CVec& y) const override {
        // inverse FFT carries 1/N; multiply by sqrt(N) for the unitary adjoint
        return (scale_ * double(n_)) * fft_inverse(y);
    }

private:
    Index n_;
    double scale_;
};

class Dft2Op final : public LinearOperator {
public:
    Dft2Op(Index rows, Index cols)
        : nr_(rows), nc_(cols), scale_(1.0 / std::sqrt(double(rows * cols))) {}
    Index rows() const override { return nr_ * nc_; }
    Index cols() const override { return nr_ * nc_; }
    OpKind kind() const override { return OpKind::Dft; }
    CVec do_apply(const CVec& x) const override { return transform(x, false); }
    CVec do_adjoint_apply(const CVec& y) const override { return transform(y, true); }

private:
    // Row-major raveled image; 1-D FFTs along rows then columns.
    CVec transform(const CVec& x, bool inverse) const {
        using MapT = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic,
                                                    Eigen::Dynamic, Eigen::RowMajor>>;
        Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> img =
            MapT(x.data(), nr_, nc_);
        Eigen::FFT<double> fft;
        CVec buf_in, buf_out;
        for (Index r = 0; r < nr_; ++r) {
            buf_in = img.row(r).transpose();
            buf_out.resize(nc_);
            if (inverse) fft.inv(buf_out, buf_in); else fft.fwd(buf_out, buf_in);
            img.row(r) = buf_out.transpose();
        }
        for (Index c = 0; c < nc_; ++c) {
            buf_in = img.col(c);
            buf_out.resize(nr_);
            if (inverse) fft.inv(buf_out, buf_in); else fft.fwd(buf_out, buf_in);
            img.col(c) = buf_out;
        }
        CVec out = Eigen::Map<CVec>(img.data(), nr_ * nc_);
        // fwd is unnormalized; inv carries 1/(nr*nc). Unitary scaling needs
        // 1/sqrt(nr*nc) forward and sqrt(nr*nc) on top of Eigen's inverse.
        out *= inverse ? 1.0 / scale_ : scale_;
        return out;
    }

    Index nr_, nc_;
    double scale_;
};

class StackedOp final : public LinearOperator {
public:
    explicit StackedOp(std::vector<OpPtr> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw std::invalid_argument("stacked: no blocks");
        cols_ = blocks_.front()->cols();
        rows_ = 0;
        for (const auto& b : blocks_) {
            if (b->cols() != cols_) {
                throw std::invalid_argument("stacked: column mismatch between blocks");
            }
            rows_ += b->rows();
        }
    }
    Index rows() const override { return rows_; }
    Index cols() const override { return cols_; }
    OpKind kind() const override { return OpKind::Stacked; }
    CVec do_apply(const CVec& x) const override {
        CVec y(rows_);
        Index off = 0;
        for (const auto& b : blocks_) {
            y.segment(off, b->rows()) = b->apply(x);
            off += b->rows();
        }
        return y;
    }
    CVec do_adjoint_apply(const CVec& y) const override {
        CVec x = CVec::Zero(cols_);
        Index off = 0;
        for (const auto& b : blocks_) {
            x += b->adjoint_apply(y.segment(off, b->rows()));
            off += b->rows();
        }
        return x;
    }
    const std::vector<OpPtr>& blocks() const { return blocks_; }

private:
    std::vector<OpPtr> blocks_;
    Index rows_ = 0, cols_ = 0;
};

class ComposedOp final : public LinearOperator {
public:
    ComposedOp(OpPtr A, OpPtr B) : A_(std::move(A)), B_(std::move(B)) {
        if (A_->cols() != B_->rows()) {
            throw std::invalid_argument("composed: inner dimension mismatch");
        }
    }
    Index rows() const override { return A_->rows(); }
    Index cols() const override { return B_->cols(); }
    OpKind kind() const override { return OpKind::Composed; }
    CVec do_apply(const CVec& x) const override { return A_->apply(B_->apply(x)); }
    CVec do_adjoint_apply(const CVec& y) const override {
        return B_->adjoint_apply(A_->adjoint_apply(y));
    }

private:
    OpPtr A_, B_;
};

class DenseHermitian final : public HermitianOperator {
public:
    explicit DenseHermitian(CMat H) : H_(std::move(H)) {
        if (H_.rows() != H_.cols()) {
            throw std::invalid_argument("hermitian: matrix not square");
        }
        double asym = (H_ - H_.adjoint()).norm();
        if (asym > 1e-10 * std::max(1.0, H_.norm())) {
            throw std::invalid_argument("hermitian: matrix not Hermitian");
        }
    }
    Index dim() const override { return H_.rows(); }
    CVec do_apply(const CVec& x) const override { return H_ * x; }

private:
    CMat H_;
};

class GramHermitian final : public HermitianOperator {
public:
    GramHermitian(OpPtr A, RVec w) : A_(std::move(A)), w_(std::move(w)) {
        if (w_.size() != A_->rows()) {
            detail::dimension_error("gram weights", A_->rows(), w_.size());
        }
        if ((w_.array() < 0.0).any()) {
            throw std::invalid_argument("gram: negative weights");
        }
    }
    Index dim() const override { return A_->cols(); }
    CVec do_apply(const CVec& x) const override {
        CVec ax = A_->apply(x);
        ax.array() *= w_.array();
        return A_->adjoint_apply(ax);
    }
    const LinearOperator* factor() const { return A_.get(); }
    const RVec& weights() const { return w_; }

private:
    OpPtr A_;
    RVec w_;
};

}  // namespace

OpPtr make_dense(CMat A) { return std::make_shared<DenseOp>(std::move(A)); }
OpPtr make_dense(const RMat& A) { return make_dense(CMat(A.cast<Complex>())); }

OpPtr make_diagonal(CVec diag) {
    if (diag.size() == 0) throw std::invalid_argument("diagonal: empty");
    return std::make_shared<DiagonalOp>(std::move(diag));
}
OpPtr make_diagonal(const RVec& diag) { return make_diagonal(CVec(diag.cast<Complex>())); }

OpPtr make_identity(Index n) { return make_diagonal(CVec(CVec::Ones(n))); }

OpPtr make_circulant(CVec first_column) {
    if (first_column.size() == 0) throw std::invalid_argument("circulant: empty");
    return std::make_shared<CirculantOp>(std::move(first_column));
}

OpPtr make_dft(Index n) {
    if (n <= 0) throw std::invalid_argument("dft: nonpositive size");
    return std::make_shared<DftOp>(n);
}

OpPtr make_dft2(Index rows, Index cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("dft2: nonpositive size");
    return std::make_shared<Dft2Op>(rows, cols);
}

OpPtr make_stacked(std::vector<OpPtr> blocks) {
    return std::make_shared<StackedOp>(std::move(blocks));
}

OpPtr make_composed(OpPtr A, OpPtr B) {
    return std::make_shared<ComposedOp>(std::move(A), std::move(B));
}

bool is_identity(const LinearOperator& op) {
    const auto* d = dynamic_cast<const DiagonalOp*>(&op);
    return d != nullptr && d->is_identity();
}

const std::vector<OpPtr>& stacked_blocks(const LinearOperator& op) {
    static const std::vector<OpPtr> empty;
    const auto* s = dynamic_cast<const StackedOp*>(&op);
    return s ? s->blocks() : empty;
}

const CVec& circulant_eigenvalues(const LinearOperator& op) {
    const auto* c = dynamic_cast<const CirculantOp*>(&op);
    if (!c) throw std::invalid_argument("circulant_eigenvalues: not a circulant operator");
    return c->eigenvalues();
}

HermPtr make_dense_hermitian(CMat H) {
    return std::make_shared<DenseHermitian>(std::move(H));
}
HermPtr make_dense_hermitian(const RMat& H) {
    return make_dense_hermitian(CMat(H.cast<Complex>()));
}

HermPtr gram(OpPtr A, RVec w) {
    return std::make_shared<GramHermitian>(std::move(A), std::move(w));
}

const LinearOperator* gram_factor(const HermitianOperator& H, RVec* weights_out) {
    const auto* g = dynamic_cast<const GramHermitian*>(&H);
    if (!g) return nullptr;
    if (weights_out) *weights_out = g->weights();
    return g->factor();
}

// ---------------------------------------------------------------------------
// Spectral utilities
// ---------------------------------------------------------------------------

CVec random_complex_gaussian(Index n, std::uint64_t seed, bool unit_norm) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec v(n);
    for (Index i = 0; i < n; ++i) {
        double re = gauss(rng);
        double im = gauss(rng);
        v[i] = Complex(re, im);
    }
    if (unit_norm) {
        double nrm = v.norm();
        if (nrm == 0.0) return random_complex_gaussian(n, seed + 1, unit_norm);
        v /= nrm;
    }
    return v;
}

PowerIterationResult power_iteration(const HermitianOperator& H, double tol,
                                     int max_iters, std::uint64_t seed) {
    const Index n = H.dim();
    CVec v = random_complex_gaussian(n, seed);
    PowerIterationResult res;
    double lambda = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        CVec hv = H.apply(v);
        lambda = std::real(v.dot(hv));
        double residual = (hv - lambda * v).norm() / std::max(std::abs(lambda), 1e-300);
        res.iters = it;
        res.value = lambda;
        res.residual = residual;
        if (residual <= tol) {
            res.converged = true;
            res.vector = v;
            return res;
        }
        double nrm = hv.norm();
        if (nrm == 0.0) {
            // H annihilated the iterate; restart from a fresh seed.
            v = random_complex_gaussian(n, seed + std::uint64_t(it));
            continue;
        }
        v = hv / nrm;
    }
    res.vector = v;
    return res;
}

namespace {

template <typename Applier>
CMat materialize_impl(Index rows, Index cols, Index cap, Applier&& apply_fn) {
    if (rows * cols > cap) {
        throw std::invalid_argument("materialize: " + std::to_string(rows) + "x" +
                                    std::to_string(cols) +
                                    " exceeds cap of " + std::to_string(cap) +
                                    " entries");
    }
    CMat M(rows, cols);
    CVec e = CVec::Zero(cols);
    for (Index j = 0; j < cols; ++j) {
        e[j] = 1.0;
        M.col(j) = apply_fn(e);
        e[j] = 0.0;
    }
    return M;
}

}  // namespace

CMat materialize(const LinearOperator& op, Index cap) {
    return materialize_impl(op.rows(), op.cols(), cap,
                            [&](const CVec& e) { return op.apply(e); });
}

CMat materialize(const HermitianOperator& op, Index cap) {
    return materialize_impl(op.dim(), op.dim(), cap,
                            [&](const CVec& e) { return op.apply(e); });
}

}  // namespace majkit
