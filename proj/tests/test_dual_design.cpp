#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "majkit/dual_design.hpp"

using namespace majkit;

namespace {

DesignProblem identity_problem(const RMat& H) {
    return make_design_problem(make_dense_hermitian(H),
                               make_identity(H.rows()));
}

// Central finite difference of L along one real coordinate of x.
double fd_partial(const DesignProblem& p, CVec x, Index j, bool imag_part,
                  double h = 1e-5) {
    Complex step = imag_part ? Complex(0, h) : Complex(h, 0);
    x[j] += step;
    double up = dual_value(p, x);
    x[j] -= 2.0 * step;
    double dn = dual_value(p, x);
    return (up - dn) / (2.0 * h);
}

}  // namespace

TEST_CASE("dual value on the identity problem is -t^4/2 + t^2") {
    RMat H = RMat::Identity(1, 1);
    auto p = identity_problem(H);
    for (double t : {0.0, 0.5, 1.0, 1.7}) {
        CVec x(1);
        x << Complex(t, 0);
        CHECK(dual_value(p, x) ==
              doctest::Approx(-0.5 * t * t * t * t + t * t).epsilon(1e-12));
    }
}

TEST_CASE("dual value respects the design weights") {
    RMat H = 2.0 * RMat::Identity(1, 1);
    RVec w(1);
    w << 4.0;
    auto p = make_design_problem(make_dense_hermitian(H), make_identity(1), w);
    CVec x(1);
    x << Complex(1, 0);
    // L = -1/2 * (1)^2 / 4 + 2 = 15/8
    CHECK(dual_value(p, x) == doctest::Approx(15.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("dual gradient matches finite differences") {
    std::vector<std::pair<Index, OpPtr>> setups;
    setups.emplace_back(4, make_identity(4));
    setups.emplace_back(8, make_dft(8));
    setups.emplace_back(6, make_stacked({make_dft(6), make_identity(6)}));
    std::uint64_t seed = 100;
    for (auto& [n, K] : setups) {
        CMat B = CMat::Random(n, n);
        CMat Hc = B.adjoint() * B;
        RVec w = (RVec::Random(K->rows()).array() + 1.5).matrix();
        auto p = make_design_problem(make_dense_hermitian(Hc), K, w);
        CVec x = random_complex_gaussian(n, seed++, false);
        CVec g = dual_gradient(p, x);
        for (Index j = 0; j < n; ++j) {
            CHECK(g[j].real() ==
                  doctest::Approx(fd_partial(p, x, j, false)).epsilon(1e-6));
            CHECK(g[j].imag() ==
                  doctest::Approx(fd_partial(p, x, j, true)).epsilon(1e-6));
        }
    }
}

TEST_CASE("line search cubic at x = 0 along a basis direction") {
    RMat H = RMat::Identity(2, 2);
    auto p = identity_problem(H);
    CVec x = CVec::Zero(2);
    CVec g(2);
    g << Complex(1, 0), Complex(0, 0);
    auto ls = line_search_coefficients(p, x, g);
    // L(alpha e1) = -alpha^4/2 + alpha^2, f'(alpha) = -2 alpha^3 + 2 alpha,
    // and f'(alpha) = -(c3 a^3 + c2 a^2 + c1 a + c0).
    CHECK(ls.c3 == doctest::Approx(2.0));
    CHECK(ls.c2 == doctest::Approx(0.0));
    CHECK(ls.c1 == doctest::Approx(-2.0));
    CHECK(ls.c0 == doctest::Approx(0.0));
}

TEST_CASE("line search cubic matches finite differences of the dual") {
    std::uint64_t seed = 300;
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = 6;
        CMat B = CMat::Random(n, n);
        CMat Hc = B.adjoint() * B;
        auto K = make_stacked({make_dft(n), make_identity(n)});
        RVec w = (RVec::Random(2 * n).array() + 1.2).matrix();
        auto p = make_design_problem(make_dense_hermitian(Hc), K, w);
        CVec x = random_complex_gaussian(n, seed++, false);
        CVec g = dual_gradient(p, x);
        auto ls = line_search_coefficients(p, x, g);
        for (double a : {-0.4, -0.1, 0.0, 0.05, 0.2, 0.6}) {
            double h = 1e-5;
            double fd = (dual_value(p, CVec(x + (a + h) * g)) -
                         dual_value(p, CVec(x + (a - h) * g))) /
                        (2.0 * h);
            double analytic = -(ls.c3 * a * a * a + ls.c2 * a * a + ls.c1 * a + ls.c0);
            CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("dual_gain matches direct dual differences") {
    const Index n = 5;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B;
    auto p = make_design_problem(make_dense_hermitian(Hc), make_dft(n));
    CVec x = random_complex_gaussian(n, 31, false);
    CVec g = dual_gradient(p, x);
    auto ls = line_search_coefficients(p, x, g);
    RVec w_inv = p.w.cwiseInverse();
    for (double a : {0.01, 0.1, 0.5}) {
        double direct = dual_value(p, CVec(x + a * g)) - dual_value(p, x);
        CHECK(ls.dual_gain(a, w_inv) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("cubic real roots on factored polynomials") {
    auto close = [](std::vector<double> got, std::vector<double> want) {
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8));
        }
    };
    close(cubic_real_roots(1, 0, -1, 0), {-1, 0, 1});
    close(cubic_real_roots(1, -6, 11, -6), {1, 2, 3});
    close(cubic_real_roots(0, 1, 0, -4), {-2, 2});      // quadratic fallback
    close(cubic_real_roots(0, 0, 2, -6), {3});          // linear fallback
    CHECK_THROWS_AS(cubic_real_roots(0, 0, 0, 0), std::invalid_argument);
}

TEST_CASE("cubic with one real root") {
    // (a - 1)(a^2 + 1) = a^3 - a^2 + a - 1
    auto roots = cubic_real_roots(1, -1, 1, -1);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ascent steps never decrease the dual value") {
    const Index n = 8;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B;
    auto p = make_design_problem(make_dense_hermitian(Hc),
                                 make_stacked({make_dft(n), make_identity(n)}));
    AscentState s = make_initial_state(p, 17);
    for (int it = 0; it < 50 && !s.stagnated; ++it) {
        AscentState next = ascent_step(p, s);
        CHECK(next.dual_value >= s.dual_value - 1e-12 * std::abs(s.dual_value));
        s = next;
    }
}

TEST_CASE("design recovers the exact diagonal for diagonal H with K = I") {
    RVec h(5);
    h << 1, 2, 3, 4, 5;
    auto p = identity_problem(RMat(h.asDiagonal()));
    DesignConfig cfg;
    cfg.iters = 300;
    cfg.seed = 7;
    cfg.cert_mode = CertMode::None;
    cfg.restarts = 2;
    auto res = design(p, cfg);
    CHECK((res.majorizer.d - h).cwiseAbs().maxCoeff() < 1e-4 * h.maxCoeff());
    CHECK(res.majorizer.alpha == doctest::Approx(1.0));
}

TEST_CASE("design matches a brute-force grid oracle at N = 2") {
    RMat H(2, 2);
    H << 2, 1, 1, 2;
    auto p = identity_problem(H);
    // Oracle: minimize 1/2 (d1^2 + d2^2) over a fine grid subject to
    // diag(d) - H being PSD (trace and determinant conditions).
    double best = 1e300, bd1 = 0, bd2 = 0;
    for (int i = 0; i <= 4000; ++i) {
        double d1 = 2.0 + i * 1e-3;
        for (int j = 0; j <= 4000; ++j) {
            double d2 = 2.0 + j * 1e-3;
            if ((d1 - 2) * (d2 - 2) >= 1.0) {
                double obj = 0.5 * (d1 * d1 + d2 * d2);
                if (obj < best) { best = obj; bd1 = d1; bd2 = d2; }
            }
        }
    }
    CHECK(bd1 == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(bd2 == doctest::Approx(3.0).epsilon(1e-3));

    DesignConfig cfg;
    cfg.iters = 500;
    cfg.seed = 11;
    cfg.cert_mode = CertMode::None;
    cfg.restarts = 3;
    auto res = design(p, cfg);
    CHECK(res.majorizer.d[0] == doctest::Approx(bd1).epsilon(2e-3));
    CHECK(res.majorizer.d[1] == doctest::Approx(bd2).epsilon(2e-3));
}

TEST_CASE("factor-3 certificate holds at converged stationary points") {
    std::uint64_t seed = 900;
    for (int trial = 0; trial < 8; ++trial) {
        const Index n = 4 + 2 * trial;
        CMat B = CMat::Random(n, n);
        CMat Hc = B.adjoint() * B;
        auto p = make_design_problem(make_dense_hermitian(Hc),
                                     make_stacked({make_dft(n), make_identity(n)}));
        DesignConfig cfg;
        cfg.iters = 2000;
        cfg.seed = seed++;
        cfg.cert_mode = CertMode::Factor3;
        cfg.restarts = 2;
        auto res = design(p, cfg);
        if (res.final_state.grad_norm >
            1e-8 * std::max(1.0, res.final_state.x.norm())) {
            continue;  // not converged to stationarity; certificate untested
        }
        CHECK(res.majorizer.alpha == doctest::Approx(3.0));
        auto v = verify_majorization(res.majorizer, *p.H, VerifyMode::Dense);
        CHECK(v.min_eig >= -1e-8 * v.h_lambda_max);
    }
}

TEST_CASE("verify_majorization on trivial cases") {
    RMat H(2, 2);
    H << 1, 0, 0, 2;
    auto Hop = make_dense_hermitian(H);
    MajorizerSpec M;
    M.K = make_identity(2);
    M.d = RVec::Constant(2, 3.0);
    auto v = verify_majorization(M, *Hop);
    CHECK(v.majorizes);
    CHECK(v.min_eig == doctest::Approx(1.0));
    CHECK(v.h_lambda_max == doctest::Approx(2.0));

    M.d = RVec::Constant(2, 1.5);
    auto v2 = verify_majorization(M, *Hop);
    CHECK_FALSE(v2.majorizes);
    CHECK(v2.min_eig == doctest::Approx(-0.5));
}

TEST_CASE("lanczos verification agrees with dense on a desk-scale case") {
    const Index n = 32;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B;
    auto Hop = make_dense_hermitian(Hc);
    MajorizerSpec M = sqs_majorizer(*Hop);
    auto vd = verify_majorization(M, *Hop, VerifyMode::Dense);
    auto vl = verify_majorization(M, *Hop, VerifyMode::Lanczos);
    CHECK(vd.majorizes);
    CHECK(vl.majorizes == vd.majorizes);
    CHECK(vl.min_eig == doctest::Approx(vd.min_eig).epsilon(1e-3));
}

TEST_CASE("weak duality holds for random feasible pairs") {
    const Index n = 8;
    std::uint64_t seed = 4000;
    CMat B = CMat::Random(n, n);
    CMat Hc = B.adjoint() * B;
    Eigen::SelfAdjointEigenSolver<CMat> es(Hc, Eigen::EigenvaluesOnly);
    double lmax = es.eigenvalues().maxCoeff();
    auto p = make_design_problem(make_dense_hermitian(Hc), make_identity(n));
    for (int k = 0; k < 200; ++k) {
        RVec d = RVec::Constant(n, lmax) +
                 RVec((RVec::Random(n).array() + 1.0).matrix());  // feasible
        CVec x = random_complex_gaussian(n, seed++, false);
        double gap = duality_gap(p, d, x);
        CHECK(gap >= -1e-9 * primal_value(p, d));
    }
}

TEST_CASE("duality gap is +inf for infeasible d") {
    RMat H(2, 2);
    H << 2, 1, 1, 2;
    auto p = identity_problem(H);
    RVec d(2);
    d << 1.0, 1.0;  // diag(d) - H is indefinite
    CVec x = CVec::Zero(2);
    CHECK(std::isinf(duality_gap(p, d, x)));
}

TEST_CASE("strong duality at the diagonal optimum") {
    RVec h(4);
    h << 1, 3, 2, 5;
    auto p = identity_problem(RMat(h.asDiagonal()));
    // Optimal primal d = h; optimal dual x has |x_j|^2 = d_j.
    CVec x = h.cwiseSqrt().cast<Complex>();
    CHECK(duality_gap(p, h, x) <= 1e-6 * primal_value(p, h));
}
