#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "majkit/solvers.hpp"

using namespace majkit;

TEST_CASE("solve_M is exact for scaled identity") {
    MajorizerSpec M;
    M.K = make_identity(3);
    M.d = RVec::Constant(3, 2.0);
    M.certified = true;
    CVec r = random_complex_gaussian(3, 1, false);
    auto res = solve_M(M, r);
    CHECK(res.exact);
    CHECK((res.z - 0.5 * r).norm() < 1e-15 * r.norm());
}

TEST_CASE("solve_M round-trips dft-structured majorizers") {
    const Index n = 16;
    MajorizerSpec M;
    M.K = make_dft(n);
    M.d = (RVec::Random(n).array() + 1.5).matrix();
    M.alpha = 1.7;
    M.certified = true;
    CVec x = random_complex_gaussian(n, 3, false);
    CVec r = M.apply(x);
    auto res = solve_M(M, r);
    CHECK(res.exact);
    CHECK((res.z - x).norm() < 1e-10 * x.norm());
}

TEST_CASE("solve_M on a stacked circ+diag majorizer matches a dense oracle") {
    const Index n = 32;
    MajorizerSpec M;
    M.K = make_stacked({make_dft(n), make_identity(n)});
    RVec d(2 * n);
    d.head(n) = (RVec::Random(n).array() + 1.2).matrix();
    d.tail(n) = (RVec::Random(n).array() + 1.2).matrix();
    M.d = d;
    M.certified = true;
    CMat Md = materialize(*as_hermitian(M));
    CVec r = random_complex_gaussian(n, 5, false);
    CVec oracle = Md.ldlt().solve(r);
    auto res = solve_M(M, r, 200, 1e-12);
    CHECK((res.z - oracle).norm() < 1e-6 * oracle.norm());
}

TEST_CASE("mm with M = H converges in one step") {
    RMat Hd(2, 2);
    Hd << 2, 0, 0, 5;
    QuadraticProblem q;
    q.H = make_dense_hermitian(Hd);
    q.g = CVec::Ones(2);
    q.x0 = random_complex_gaussian(2, 9, false);
    MajorizerSpec M;
    M.K = make_identity(2);
    M.d = RVec(Hd.diagonal());
    M.certified = true;
    CVec x_star = -Hd.cast<Complex>().ldlt().solve(q.g);
    auto trace = mm_quadratic(q, M, 3, x_star);
    CHECK(trace[1].distance < 1e-12);
}

TEST_CASE("mm contraction factor matches the spectral bound") {
    RMat Hd(2, 2);
    Hd << 1, 0, 0, 4;
    QuadraticProblem q;
    q.H = make_dense_hermitian(Hd);
    q.g = CVec::Ones(2);
    q.x0 = CVec::Ones(2);
    MajorizerSpec M;  // Lipschitz majorizer 4 I
    M.K = make_identity(2);
    M.d = RVec::Constant(2, 4.0);
    M.certified = true;
    CVec x_star = -Hd.cast<Complex>().ldlt().solve(q.g);
    auto trace = mm_quadratic(q, M, 20, x_star);
    // iteration matrix I - M^{-1} H has eigenvalues 3/4 and 0
    for (size_t k = 1; k < trace.size(); ++k) {
        CHECK(trace[k].distance <= 0.75 * trace[k - 1].distance + 1e-14);
    }
}

TEST_CASE("mm cost is monotone nonincreasing on a random PSD instance") {
    const Index n = 12;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B;
    QuadraticProblem q;
    q.H = make_dense_hermitian(Hc);
    q.g = random_complex_gaussian(n, 21, false);
    q.x0 = random_complex_gaussian(n, 22, false);
    MajorizerSpec M = sqs_majorizer(*q.H);
    auto trace = mm_quadratic(q, M, 50);
    for (size_t k = 1; k < trace.size(); ++k) {
        CHECK(trace[k].cost <= trace[k - 1].cost + 1e-10 * std::abs(trace[0].cost));
    }
}

TEST_CASE("majorized spectrum of M = H is all ones") {
    RMat Hd(3, 3);
    Hd << 2, 1, 0, 1, 3, 1, 0, 1, 2;
    auto H = make_dense_hermitian(Hd);
    MajorizerSpec M;
    CMat Hc = Hd.cast<Complex>();
    M.K = make_dense(CMat(Hc.llt().matrixL().adjoint()));
    M.d = RVec::Ones(3);
    RVec spec = majorized_spectrum(M, *H);
    for (Index i = 0; i < 3; ++i) {
        CHECK(spec[i] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("majorized spectrum of a diagonal pair") {
    RVec h(2), d(2);
    h << 1, 4;
    d << 4, 4;
    auto H = make_dense_hermitian(RMat(h.asDiagonal()));
    MajorizerSpec M;
    M.K = make_identity(2);
    M.d = d;
    RVec spec = majorized_spectrum(M, *H);
    CHECK(spec[0] == doctest::Approx(0.25));
    CHECK(spec[1] == doctest::Approx(1.0));
}

TEST_CASE("cg solves identity in one iteration") {
    auto A = make_dense_hermitian(RMat(RMat::Identity(4, 4)));
    CVec b = random_complex_gaussian(4, 31, false);
    auto res = conjugate_gradient(*A, b, CVec::Zero(4), 5, 1e-12);
    CHECK(res.converged);
    CHECK(res.iters <= 1);
    CHECK((res.x - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("cg converges on a dense SPD system") {
    const Index n = 64;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B + 0.1 * CMat::Identity(n, n);
    auto A = make_dense_hermitian(Hc);
    CVec b = random_complex_gaussian(n, 33, false);
    auto res = conjugate_gradient(*A, b, CVec::Zero(n), 10 * int(n), 1e-10);
    CHECK(res.converged);
    CVec oracle = Hc.ldlt().solve(b);
    CHECK((res.x - oracle).norm() < 1e-6 * oracle.norm());
}

TEST_CASE("cg aborts on negative curvature") {
    RMat Hd(2, 2);
    Hd << 1, 0, 0, -1;
    auto A = make_dense_hermitian(Hd);
    CVec b(2);
    b << Complex(0, 0), Complex(1, 0);
    CHECK_THROWS_AS(conjugate_gradient(*A, b, CVec::Zero(2), 10, 1e-10),
                    std::runtime_error);
}
