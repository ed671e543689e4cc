#include "majkit/ct.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "majkit/io.hpp"

namespace majkit::ct {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Geometry::detector_spacing() const {
    // Detector extent covers the image diagonal.
    return double(n) * pixel_size * std::sqrt(2.0) / double(n_channels);
}

void Geometry::validate() const {
    if (n < 1 || n_views < 1 || n_channels < 1 || pixel_size <= 0.0) {
        throw std::invalid_argument("geometry: degenerate configuration");
    }
}

namespace {

class ProjectorOp final : public LinearOperator {
public:
    explicit ProjectorOp(Eigen::SparseMatrix<double> A) : A_(std::move(A)) {
        At_ = A_.transpose();
    }
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    OpKind kind() const override { return OpKind::Projector; }
    CVec do_apply(const CVec& x) const override {
        RVec re = A_ * RVec(x.real());
        RVec im = A_ * RVec(x.imag());
        CVec y(A_.rows());
        y.real() = re;
        y.imag() = im;
        return y;
    }
    CVec do_adjoint_apply(const CVec& y) const override {
        RVec re = At_ * RVec(y.real());
        RVec im = At_ * RVec(y.imag());
        CVec x(A_.cols());
        x.real() = re;
        x.imag() = im;
        return x;
    }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

private:
    Eigen::SparseMatrix<double> A_;
    Eigen::SparseMatrix<double> At_;
};

// Siddon ray trace: intersection lengths of the line p(t) = s*normal + t*dir
// with the pixel grid [-L/2, L/2]^2.
void trace_ray(double s, double theta, Index n, double pixel,
               Index row, std::vector<Eigen::Triplet<double>>& triplets) {
    const double L = double(n) * pixel;
    const double half = 0.5 * L;
    const double nx = std::cos(theta), ny = std::sin(theta);
    const double dx = -ny, dy = nx;  // ray direction, unit length
    const double px = s * nx, py = s * ny;

    // Parametric range of the box intersection.
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    const double eps = 1e-12;
    if (std::abs(dx) < eps) {
        if (px <= -half || px >= half) return;
    } else {
        double t1 = (-half - px) / dx, t2 = (half - px) / dx;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    }
    if (std::abs(dy) < eps) {
        if (py <= -half || py >= half) return;
    } else {
        double t1 = (-half - py) / dy, t2 = (half - py) / dy;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    }
    if (tmax <= tmin) return;

    // Merge the sorted x- and y-crossing parameters into cell segments.
    std::vector<double> ts;
    ts.push_back(tmin);
    auto add_crossings = [&](double p0, double d) {
        if (std::abs(d) < eps) return;
        for (Index k = 0; k <= n; ++k) {
            double boundary = -half + double(k) * pixel;
            double t = (boundary - p0) / d;
            if (t > tmin + eps && t < tmax - eps) ts.push_back(t);
        }
    };
    add_crossings(px, dx);
    add_crossings(py, dy);
    ts.push_back(tmax);
    std::sort(ts.begin(), ts.end());

    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        double t0 = ts[i], t1 = ts[i + 1];
        double len = t1 - t0;
        if (len <= eps) continue;
        double tm = 0.5 * (t0 + t1);
        double mx = px + tm * dx, my = py + tm * dy;
        Index cx = Index(std::floor((mx + half) / pixel));
        Index cy = Index(std::floor((my + half) / pixel));
        if (cx < 0 || cx >= n || cy < 0 || cy >= n) continue;
        // Row-major raveling with cy as the image row (y grows downward in
        // array order), cx as the column.
        Index col = (n - 1 - cy) * n + cx;
        triplets.emplace_back(row, col, len);
    }
}

Eigen::SparseMatrix<double> build_system_matrix(const Geometry& geom) {
    geom.validate();
    const double spacing = geom.detector_spacing();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(size_t(geom.sinogram_size()) * size_t(2 * geom.n));
    for (Index v = 0; v < geom.n_views; ++v) {
        double theta = kPi * double(v) / double(geom.n_views);
        for (Index c = 0; c < geom.n_channels; ++c) {
            double s = (double(c) - 0.5 * double(geom.n_channels - 1)) * spacing;
            Index row = v * geom.n_channels + c;
            trace_ray(s, theta, geom.n, geom.pixel_size, row, triplets);
        }
    }
    Eigen::SparseMatrix<double> A(geom.sinogram_size(), geom.image_size());
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    return A;
}

}  // namespace

OpPtr build_projector(const Geometry& geom) {
    return std::make_shared<ProjectorOp>(build_system_matrix(geom));
}

const Eigen::SparseMatrix<double>& projector_matrix(const LinearOperator& op) {
    const auto* p = dynamic_cast<const ProjectorOp*>(&op);
    if (!p) throw std::invalid_argument("projector_matrix: not a projector operator");
    return p->matrix();
}

OpPtr downsampled_K(const Geometry& geom_full, double view_factor,
                    double channel_factor, Geometry* geom_down_out) {
    if (view_factor < 1.0 || channel_factor < 1.0) {
        throw std::invalid_argument("downsampled_K: factors must be >= 1");
    }
    Geometry down = geom_full;
    down.n_views = std::max<Index>(1, Index(double(geom_full.n_views) / view_factor));
    down.n_channels = std::max<Index>(1, Index(double(geom_full.n_channels) / channel_factor));
    down.validate();
    if (geom_down_out) *geom_down_out = down;

    // A_down = S A: keep an evenly spaced subset of the views and rebin the
    // detector by summing adjacent channel groups. Rebinning (rather than
    // re-tracing thin rays at the coarse spacing) keeps every pixel covered,
    // so A_down spans the same spatial extent as the full system.
    const Index nV = geom_full.n_views, nC = geom_full.n_channels;
    const Index nv = down.n_views, nc = down.n_channels;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(nv) * size_t(nC));
    for (Index v = 0; v < nv; ++v) {
        Index src_v = (v * nV) / nv;
        for (Index c = 0; c < nc; ++c) {
            Index c0 = (c * nC) / nc, c1 = ((c + 1) * nC) / nc;
            for (Index s = c0; s < c1; ++s) {
                trip.emplace_back(v * nc + c, src_v * nC + s, 1.0);
            }
        }
    }
    Eigen::SparseMatrix<double> S(nv * nc, geom_full.sinogram_size());
    S.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> Ad = S * build_system_matrix(geom_full);
    Ad.makeCompressed();
    return make_stacked({std::make_shared<ProjectorOp>(std::move(Ad)),
                         make_identity(geom_full.image_size())});
}

// ---------------------------------------------------------------------------
// Regularizer
// ---------------------------------------------------------------------------

namespace {

// Visit horizontal and vertical neighbor differences of an n x n row-major
// image.
template <typename F>
void for_each_difference(Index n, F&& fn) {
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c + 1 < n; ++c) {
            fn(r * n + c, r * n + c + 1);
        }
    }
    for (Index r = 0; r + 1 < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            fn(r * n + c, (r + 1) * n + c);
        }
    }
}

}  // namespace

double regularizer_value(const RVec& x, Index n, const RegularizerParams& params) {
    if (params.delta <= 0.0) throw std::invalid_argument("regularizer: delta <= 0");
    const double d2 = params.delta * params.delta;
    double total = 0.0;
    for_each_difference(n, [&](Index i, Index j) {
        double t = (x[i] - x[j]) / params.delta;
        total += d2 * (std::sqrt(1.0 + t * t) - 1.0);
    });
    return params.strength * total;
}

RVec regularizer_gradient(const RVec& x, Index n, const RegularizerParams& params) {
    if (params.delta <= 0.0) throw std::invalid_argument("regularizer: delta <= 0");
    RVec g = RVec::Zero(x.size());
    for_each_difference(n, [&](Index i, Index j) {
        double diff = x[i] - x[j];
        double t = diff / params.delta;
        // d/d(diff) of delta^2 (sqrt(1+t^2) - 1) = diff / sqrt(1+t^2)
        double deriv = diff / std::sqrt(1.0 + t * t);
        g[i] += deriv;
        g[j] -= deriv;
    });
    return params.strength * g;
}

RVec difference_gram_apply(const RVec& x, Index n) {
    RVec g = RVec::Zero(x.size());
    for_each_difference(n, [&](Index i, Index j) {
        double diff = x[i] - x[j];
        g[i] += diff;
        g[j] -= diff;
    });
    return g;
}

// ---------------------------------------------------------------------------
// ADMM updates
// ---------------------------------------------------------------------------

void CTProblem::validate() const {
    geom.validate();
    if (!A || A->rows() != geom.sinogram_size() || A->cols() != geom.image_size()) {
        throw std::invalid_argument("ct problem: projector dimensions inconsistent");
    }
    if (y.size() != A->rows()) detail::dimension_error("ct y", A->rows(), y.size());
    if (w.size() != A->rows()) detail::dimension_error("ct w", A->rows(), w.size());
    if (w.minCoeff() <= 0.0) throw std::invalid_argument("ct problem: weights must be positive");
}

namespace {

RVec real_apply(const LinearOperator& op, const RVec& x) {
    if (const auto* p = dynamic_cast<const ProjectorOp*>(&op)) {
        return p->matrix() * x;
    }
    return op.apply(x.cast<Complex>()).real();
}

RVec real_adjoint_apply(const LinearOperator& op, const RVec& y) {
    if (const auto* p = dynamic_cast<const ProjectorOp*>(&op)) {
        return p->matrix().transpose() * y;
    }
    return op.adjoint_apply(y.cast<Complex>()).real();
}

}  // namespace

RVec admm_u_update(const ADMMState& s, const RVec& ax, const RVec& y, const RVec& w) {
    return (w.array() * y.array() + s.gamma * (ax.array() + s.e.array())) /
           (w.array() + s.gamma);
}

XUpdateResult admm_x_update(const CTProblem& prob, const ADMMState& s,
                            const MajorizerSpec& M, const RVec& u_new,
                            int cg_iters) {
    const Index n = prob.geom.n;
    RVec ax = real_apply(*prob.A, s.x);
    RVec data_grad = s.gamma * real_adjoint_apply(*prob.A, RVec(ax - u_new + s.e));
    RVec reg_grad = regularizer_gradient(s.x, n, prob.reg);
    RVec rhs = -(data_grad + reg_grad);

    // Surrogate Hessian: M + strength * C^T C (quadratic upper bound on R's
    // curvature; hyperbola potential has curvature <= 1 per difference).
    class SurrogateHessian final : public HermitianOperator {
    public:
        SurrogateHessian(const MajorizerSpec& M, Index n, double strength)
            : M_(M), n_(n), strength_(strength) {}
        Index dim() const override { return M_.dim(); }
        CVec do_apply(const CVec& z) const override {
            CVec mz = M_.apply(z);
            RVec cr = difference_gram_apply(z.real(), n_);
            RVec ci = difference_gram_apply(z.imag(), n_);
            mz.real() += strength_ * cr;
            mz.imag() += strength_ * ci;
            return mz;
        }
    private:
        const MajorizerSpec& M_;
        Index n_;
        double strength_;
    };
    SurrogateHessian Q(M, n, prob.reg.strength);

    CgResult cg = conjugate_gradient(Q, rhs.cast<Complex>(),
                                     CVec::Zero(M.dim()), cg_iters, 1e-12);
    RVec z = cg.x.real();

    // Quadratic surrogate value relative to z = 0 (where it equals the
    // objective's surrogate at x^{(n)}); CG from 0 keeps it nonpositive.
    RVec qz = Q.apply(z.cast<Complex>()).real();
    double surrogate_delta = 0.5 * z.dot(qz) - z.dot(rhs);
    double scale = std::abs(z.dot(rhs)) + 1e-300;
    if (surrogate_delta > 1e-10 * scale) {
        throw std::runtime_error("admm_x_update: surrogate increased "
                                 "(majorization falsified)");
    }
    XUpdateResult out;
    out.x = s.x + z;
    out.surrogate_decrease = -surrogate_delta;
    return out;
}

RVec admm_dual_update(const ADMMState& s, const RVec& ax_new, const RVec& u_new) {
    return s.e + ax_new - u_new;
}

double ct_cost(const CTProblem& prob, const RVec& x) {
    RVec r = real_apply(*prob.A, x) - prob.y;
    return 0.5 * (prob.w.array() * r.array().square()).sum() +
           regularizer_value(x, prob.geom.n, prob.reg);
}

CTResult ct_reconstruct(const CTProblem& prob, const MajorizerSpec& M,
                        int outer_iters, const RVec& x0, int cg_iters) {
    prob.validate();
    RVec w_sorted = prob.w;
    std::nth_element(w_sorted.data(), w_sorted.data() + w_sorted.size() / 2,
                     w_sorted.data() + w_sorted.size());
    const double gamma = w_sorted[w_sorted.size() / 2];

    ADMMState s;
    s.x = x0;
    s.gamma = gamma;
    RVec ax = real_apply(*prob.A, s.x);
    s.u = ax;
    s.e = RVec::Zero(prob.A->rows());

    CTResult out;
    out.trace.push_back({0, ct_cost(prob, s.x), (ax - s.u).norm()});
    for (int it = 1; it <= outer_iters; ++it) {
        RVec u_new = admm_u_update(s, ax, prob.y, prob.w);
        XUpdateResult xu = admm_x_update(prob, s, M, u_new, cg_iters);
        s.x = xu.x;
        ax = real_apply(*prob.A, s.x);
        s.e = admm_dual_update(s, ax, u_new);
        s.u = u_new;
        out.trace.push_back({it, ct_cost(prob, s.x), (ax - s.u).norm()});
    }
    out.image = s.x;
    return out;
}

// ---------------------------------------------------------------------------
// Phantom, simulation, FBP
// ---------------------------------------------------------------------------

RVec phantom(Index n) {
    struct Ellipse { double cx, cy, a, b, angle, value; };
    // Centers and axes in units of the half image side.
    const Ellipse ellipses[] = {
        {0.0, 0.0, 0.86, 0.92, 0.0, 1.0},
        {0.0, -0.02, 0.78, 0.84, 0.0, -0.6},
        {0.22, 0.0, 0.24, 0.4, -0.3, 0.25},
        {-0.22, 0.0, 0.24, 0.4, 0.3, 0.25},
        {0.0, 0.45, 0.14, 0.14, 0.0, 0.35},
        {0.0, -0.35, 0.08, 0.12, 0.0, -0.2},
        {0.3, -0.45, 0.06, 0.06, 0.0, 0.3},
        {-0.3, -0.45, 0.06, 0.06, 0.0, 0.3},
    };
    RVec img = RVec::Zero(n * n);
    for (Index r = 0; r < n; ++r) {
        for (Index c = 0; c < n; ++c) {
            double y = 1.0 - 2.0 * (double(r) + 0.5) / double(n);
            double x = 2.0 * (double(c) + 0.5) / double(n) - 1.0;
            double v = 0.0;
            for (const auto& e : ellipses) {
                double ca = std::cos(e.angle), sa = std::sin(e.angle);
                double dx = x - e.cx, dy = y - e.cy;
                double u = (ca * dx + sa * dy) / e.a;
                double t = (-sa * dx + ca * dy) / e.b;
                if (u * u + t * t <= 1.0) v += e.value;
            }
            img[r * n + c] = std::max(0.0, v);
        }
    }
    return img;
}

SimulatedScan simulate_scan(const Geometry& geom, const OpPtr& A,
                            double noise_level, std::uint64_t seed) {
    SimulatedScan scan;
    scan.x_true = phantom(geom.n);
    scan.y_clean = real_apply(*A, scan.x_true);

    // Transmission-like weights: exp(-line integral) rescaled to [0.05, 1].
    RVec expo = (-scan.y_clean.array() / std::max(1.0, scan.y_clean.maxCoeff()) * 4.0).exp();
    double lo = expo.minCoeff(), hi = expo.maxCoeff();
    scan.w = hi > lo ? RVec(0.05 + 0.95 * (expo.array() - lo) / (hi - lo))
                     : RVec(RVec::Ones(expo.size()));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    scan.y = scan.y_clean;
    for (Index i = 0; i < scan.y.size(); ++i) {
        scan.y[i] += noise_level * gauss(rng) / std::sqrt(scan.w[i]);
    }
    return scan;
}

RVec fbp(const Geometry& geom, const OpPtr& A, const RVec& sinogram) {
    const Index nc = geom.n_channels;
    Index nfft = 1;
    while (nfft < 2 * nc) nfft *= 2;

    // Frequency-domain ramp apodized by a Hann window.
    RVec filter(nfft);
    for (Index k = 0; k < nfft; ++k) {
        double f = double(k <= nfft / 2 ? k : nfft - k) / double(nfft / 2);
        filter[k] = f * 0.5 * (1.0 + std::cos(kPi * f));
    }

    Eigen::FFT<double> fft;
    RVec filtered(sinogram.size());
    for (Index v = 0; v < geom.n_views; ++v) {
        CVec row = CVec::Zero(nfft);
        for (Index c = 0; c < nc; ++c) row[c] = sinogram[v * nc + c];
        CVec spec(nfft), back(nfft);
        fft.fwd(spec, row);
        spec.array() *= filter.array().cast<Complex>();
        fft.inv(back, spec);
        for (Index c = 0; c < nc; ++c) filtered[v * nc + c] = back[c].real();
    }

    RVec img = real_adjoint_apply(*A, filtered);
    // Least-squares rescale: the exact FBP constant depends on the sampling,
    // and this is only an initializer.
    RVec proj = real_apply(*A, img);
    double denom = proj.squaredNorm();
    double scale = denom > 0.0 ? proj.dot(sinogram) / denom : 0.0;
    return scale * img;
}

Geometry geometry_from_config(const std::filesystem::path& config) {
    auto kv = majkit::io::read_key_values(config);
    Geometry g;
    if (kv.count("n")) g.n = std::stoll(kv.at("n"));
    if (kv.count("n_views")) g.n_views = std::stoll(kv.at("n_views"));
    if (kv.count("n_channels")) g.n_channels = std::stoll(kv.at("n_channels"));
    if (kv.count("pixel_size")) g.pixel_size = std::stod(kv.at("pixel_size"));
    g.validate();
    return g;
}

}  // namespace majkit::ct
