#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "majkit/io.hpp"

using namespace majkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("majkit_io_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("dense real matrix market round trip") {
    TempDir tmp;
    RMat M = RMat::Random(4, 3);
    auto p = tmp.path / "m.mm";
    io::write_matrix_market(p, M);
    CMat back = io::read_matrix_market(p);
    CHECK((back.real() - M).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(back.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense complex matrix market round trip") {
    TempDir tmp;
    CMat M = CMat::Random(3, 5);
    auto p = tmp.path / "m.mm";
    io::write_matrix_market(p, M);
    CMat back = io::read_matrix_market(p);
    CHECK((back - M).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("coordinate and symmetric matrix market files are read") {
    TempDir tmp;
    auto p = tmp.path / "coord.mm";
    {
        std::ofstream f(p);
        f << "%%MatrixMarket matrix coordinate real symmetric\n"
          << "3 3 4\n"
          << "1 1 2.0\n"
          << "2 2 3.0\n"
          << "3 3 4.0\n"
          << "2 1 -1.0\n";
    }
    CMat M = io::read_matrix_market(p);
    REQUIRE(M.rows() == 3);
    CHECK(M(0, 0).real() == doctest::Approx(2.0));
    CHECK(M(1, 0).real() == doctest::Approx(-1.0));
    CHECK(M(0, 1).real() == doctest::Approx(-1.0));  // symmetry filled in
    CHECK(M(2, 2).real() == doctest::Approx(4.0));
}

TEST_CASE("vector matrix market and csv round trips") {
    TempDir tmp;
    RVec v = RVec::Random(7);
    io::write_vector_mm(tmp.path / "v.mm", v);
    RVec back = io::read_real_vector(tmp.path / "v.mm");
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-14);

    CVec c = CVec::Random(5);
    io::write_vector_csv(tmp.path / "c.csv", c);
    CVec cback = io::read_complex_vector(tmp.path / "c.csv");
    CHECK((cback - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("image csv round trip keeps dimensions") {
    TempDir tmp;
    RVec img = RVec::Random(12);
    io::write_image_csv(tmp.path / "img.csv", img, 3, 4);
    Index r = 0, cdim = 0;
    RVec back = io::read_image_csv(tmp.path / "img.csv", &r, &cdim);
    CHECK(r == 3);
    CHECK(cdim == 4);
    CHECK((back - img).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("key value files skip comments and round trip") {
    TempDir tmp;
    io::KeyValues kv{{"alpha", "3"}, {"name", "demo"}};
    auto p = tmp.path / "cfg.txt";
    io::write_key_values(p, kv);
    {
        std::ofstream f(p, std::ios::app);
        f << "# trailing comment\n";
    }
    auto back = io::read_key_values(p);
    CHECK(back.at("alpha") == "3");
    CHECK(back.at("name") == "demo");
    CHECK(back.size() == 2);
}

TEST_CASE("majorizer sidecar round trip") {
    TempDir tmp;
    MajorizerSpec M;
    M.K = make_dft(6);
    M.d = (RVec::Random(6).array() + 2.0).matrix();
    M.alpha = 3.0;
    M.certified = true;
    M.method = CertMethod::Factor3;
    auto p = tmp.path / "maj.txt";
    io::write_majorizer(p, M, "dft");
    MajorizerSpec back = io::read_majorizer(p);
    CHECK(back.K->kind() == OpKind::Dft);
    CHECK(back.dim() == 6);
    CHECK((back.d - M.d).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(back.alpha == M.alpha);
    CHECK(back.certified);
    CHECK(back.method == CertMethod::Factor3);

    CVec x = random_complex_gaussian(6, 3, false);
    CHECK((back.apply(x) - M.apply(x)).norm() < 1e-12 * x.norm());
}

TEST_CASE("k descriptor parsing") {
    CHECK(is_identity(*io::parse_k_descriptor("identity", 4)));
    CHECK(io::parse_k_descriptor("dft", 8)->kind() == OpKind::Dft);
    auto stacked = io::parse_k_descriptor("stacked:dft+identity", 6);
    CHECK(stacked->kind() == OpKind::Stacked);
    CHECK(stacked->rows() == 12);
    CHECK(stacked->cols() == 6);
    CHECK_THROWS_AS(io::parse_k_descriptor("nonsense", 4), std::invalid_argument);
}
