#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "majkit/majorizers.hpp"

using namespace majkit;

namespace {

RMat dense_real(const MajorizerSpec& M) {
    return materialize(*as_hermitian(M)).real();
}

double min_eig(const RMat& S) {
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (S + S.transpose()),
                                           Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("sqs with nonnegative hint on a 2x2 example") {
    RMat H(2, 2);
    H << 2, 1, 1, 2;
    auto M = sqs_majorizer(*make_dense_hermitian(H), true);
    CHECK(M.d[0] == doctest::Approx(3.0));
    CHECK(M.d[1] == doctest::Approx(3.0));
    CHECK(is_identity(*M.K));
    CHECK(M.certified);
}

TEST_CASE("sqs without hint uses absolute row sums") {
    RMat H(2, 2);
    H << 2, -1, -1, 2;
    auto M = sqs_majorizer(*make_dense_hermitian(H), false);
    CHECK(M.d[0] == doctest::Approx(3.0));
    CHECK(M.d[1] == doctest::Approx(3.0));
    RMat diff = dense_real(M) - H;
    CHECK(min_eig(diff) >= -1e-12);
}

TEST_CASE("sqs hint violation is a hard error") {
    RMat H(2, 2);
    H << 2, -1, -1, 2;
    CHECK_THROWS_AS(sqs_majorizer(*make_dense_hermitian(H), true),
                    std::invalid_argument);
}

TEST_CASE("sqs majorizes random nonnegative PSD matrices") {
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 4 + trial;
        RMat B = RMat::Random(n, n).cwiseAbs();
        RMat H = B.transpose() * B;  // nonnegative entries, PSD
        auto M = sqs_majorizer(*make_dense_hermitian(H), true);
        CHECK(min_eig(dense_real(M) - H) >= -1e-10 * H.norm());
    }
}

TEST_CASE("lipschitz majorizer is lambda_max times identity") {
    RMat H(2, 2);
    H << 2, 1, 1, 2;
    auto M = lipschitz_majorizer(*make_dense_hermitian(H), 1e-6, 1);
    CHECK(M.d[0] == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(M.d[0] == M.d[1]);
    CHECK(M.d[0] >= 3.0);  // safety inflation never undershoots
    CHECK(min_eig(dense_real(M) - H) >= -1e-10);
}

TEST_CASE("best circulant approximation of a circulant is itself") {
    CVec c = random_complex_gaussian(8, 42, false);
    CMat C = materialize(*make_circulant(c));
    CMat C2 = materialize(*best_circulant_approx(C));
    CHECK((C - C2).norm() < 1e-12 * C.norm());
}

TEST_CASE("best circulant approximation of diag(1,2,3)") {
    CMat T = CMat::Zero(3, 3);
    T(0, 0) = 1;
    T(1, 1) = 2;
    T(2, 2) = 3;
    auto circ = best_circulant_approx(T);
    CMat C = materialize(*circ);
    // first column (2, 0, 0): averaged diagonal, zero off-wraps
    CHECK(std::abs(C(0, 0) - Complex(2, 0)) < 1e-14);
    CHECK(std::abs(C(1, 0)) < 1e-14);
    CHECK(std::abs(C(2, 0)) < 1e-14);
}

TEST_CASE("circulant projection beats random circulants in Frobenius norm") {
    const Index n = 8;
    CMat T = CMat::Random(n, n);
    CMat best = materialize(*best_circulant_approx(T));
    double best_err = (T - best).norm();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 1000; ++k) {
        CVec c(n);
        for (Index i = 0; i < n; ++i) c[i] = Complex(nd(rng), nd(rng));
        CMat C = materialize(*make_circulant(c));
        CHECK((T - C).norm() >= best_err - 1e-12);
    }
}

TEST_CASE("circulant projection is orthogonal (residual has no circulant part)") {
    const Index n = 6;
    CMat T = CMat::Random(n, n);
    CMat P = materialize(*best_circulant_approx(T));
    CMat resid_circ = materialize(*best_circulant_approx(CMat(T - P)));
    CHECK(resid_circ.norm() < 1e-12 * T.norm());
}

TEST_CASE("circulant_as_majorizer round-trips the operator") {
    // symmetric nonneg-definite circulant: C = B^T B with B circulant
    CVec b(5);
    b << 2.0, 0.5, 0.1, 0.1, 0.5;
    CMat Bd = materialize(*make_circulant(b));
    CMat Cd = Bd.adjoint() * Bd;
    auto circ = best_circulant_approx(Cd);  // exact: product of circulants
    auto M = circulant_as_majorizer(circ);
    CHECK(M.K->kind() == OpKind::Dft);
    CHECK((dense_real(M) - Cd.real()).norm() < 1e-10 * Cd.norm());
}

TEST_CASE("circulant_as_majorizer rejects indefinite circulants") {
    CVec c(3);
    c << 0.0, 1.0, 1.0;  // eigenvalues 2, -1, -1
    CHECK_THROWS_AS(circulant_as_majorizer(make_circulant(c)), std::invalid_argument);
}

TEST_CASE("scale_to_majorize on commuting diagonals is exact up to tol") {
    RVec d0(3), h(3);
    d0 << 1, 1, 1;
    h << 1, 4, 2;
    MajorizerSpec M0;
    M0.K = make_identity(3);
    M0.d = d0;
    auto H = make_dense_hermitian(RMat(h.asDiagonal()));
    double tol = 1e-6;
    auto M = scale_to_majorize(M0, *H, tol, 3);
    CHECK(M.alpha == doctest::Approx(4.0).epsilon(1e-4));
    CHECK(M.alpha >= 4.0);
    CHECK(M.certified);
    CHECK(M.method == CertMethod::PowerIteration);
}

TEST_CASE("scale_to_majorize is tight on a weighted Toeplitz gram") {
    const Index n = 64;
    RMat F(n, n);
    for (Index i = 0; i < n; ++i) {
        double c = std::cos(2.0 * M_PI * double(i) / double(n));
        for (Index j = 0; j < n; ++j) {
            F(i, j) = (0.1 + c * c) / std::sqrt(1.0 + double(std::abs(i - j)));
        }
    }
    RMat Hd = F.transpose() * F;
    auto H = make_dense_hermitian(Hd);
    MajorizerSpec M0;
    M0.K = make_identity(n);
    M0.d = RVec::Ones(n);
    double tol = 1e-4;
    auto M = scale_to_majorize(M0, *H, tol, 9);
    RMat diff = dense_real(M) - Hd;
    Eigen::SelfAdjointEigenSolver<RMat> es(Hd, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    double lo = min_eig(diff);
    CHECK(lo >= -1e-8 * lmax);          // actually majorizes
    CHECK(lo <= 3.0 * tol * lmax);      // and is not wastefully loose
}

TEST_CASE("scale_to_majorize rejects singular starting majorizers") {
    MajorizerSpec M0;
    M0.K = make_identity(2);
    M0.d = RVec::Zero(2);
    auto H = make_dense_hermitian(RMat(RMat::Identity(2, 2)));
    CHECK_THROWS_AS(scale_to_majorize(M0, *H, 1e-6, 1), std::invalid_argument);
}

TEST_CASE("apply_inverse_sqrt inverts apply for dft-structured majorizers") {
    const Index n = 8;
    MajorizerSpec M;
    M.K = make_dft(n);
    M.d = (RVec::Random(n).array() + 1.5).matrix();
    M.alpha = 2.5;
    CVec x = random_complex_gaussian(n, 77, false);
    CVec y = apply_inverse_sqrt(M, apply_inverse_sqrt(M, M.apply(x)));
    CHECK((y - x).norm() < 1e-10 * x.norm());
}
