#include "majkit/io.hpp"

#include <fstream>
#include <sstream>

#include "majkit/ct.hpp"

namespace majkit::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.precision(17);
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

bool is_real(const CMat& M) {
    return M.imag().cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

void write_matrix_market(const fs::path& path, const CMat& M) {
    auto out = open_out(path);
    const bool real = is_real(M);
    out << "%%MatrixMarket matrix array " << (real ? "real" : "complex")
        << " general\n";
    out << M.rows() << " " << M.cols() << "\n";
    for (Index j = 0; j < M.cols(); ++j) {
        for (Index i = 0; i < M.rows(); ++i) {
            if (real) out << M(i, j).real() << "\n";
            else out << M(i, j).real() << " " << M(i, j).imag() << "\n";
        }
    }
}

void write_matrix_market(const fs::path& path, const RMat& M) {
    write_matrix_market(path, CMat(M.cast<Complex>()));
}

CMat read_matrix_market(const fs::path& path) {
    auto in = open_in(path);
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix") {
        throw std::runtime_error("not a Matrix Market file: " + path.string());
    }
    const bool coordinate = format == "coordinate";
    const bool complex_field = field == "complex";
    const bool pattern = field == "pattern";
    const bool symmetric = symmetry == "symmetric" || symmetry == "hermitian";

    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    Index rows = 0, cols = 0;
    sizes >> rows >> cols;
    CMat M = CMat::Zero(rows, cols);

    if (coordinate) {
        Index nnz = 0;
        sizes >> nnz;
        for (Index k = 0; k < nnz; ++k) {
            Index i, j;
            double re = 1.0, im = 0.0;
            in >> i >> j;
            if (!pattern) in >> re;
            if (complex_field) in >> im;
            M(i - 1, j - 1) = Complex(re, im);
            if (symmetric && i != j) {
                M(j - 1, i - 1) = symmetry == "hermitian" ? Complex(re, -im)
                                                          : Complex(re, im);
            }
        }
    } else {
        for (Index j = 0; j < cols; ++j) {
            Index i0 = symmetric ? j : 0;
            for (Index i = i0; i < rows; ++i) {
                double re = 0.0, im = 0.0;
                in >> re;
                if (complex_field) in >> im;
                M(i, j) = Complex(re, im);
                if (symmetric && i != j) {
                    M(j, i) = symmetry == "hermitian" ? Complex(re, -im)
                                                      : Complex(re, im);
                }
            }
        }
    }
    if (!in) throw std::runtime_error("truncated Matrix Market file: " + path.string());
    return M;
}

void write_vector_mm(const fs::path& path, const RVec& v) {
    write_matrix_market(path, RMat(v));
}

void write_vector_mm(const fs::path& path, const CVec& v) {
    write_matrix_market(path, CMat(v));
}

namespace {

CVec read_csv_vector(const fs::path& path) {
    auto in = open_in(path);
    std::string line;
    std::vector<Complex> vals;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string re_s, im_s;
        std::getline(ls, re_s, ',');
        std::getline(ls, im_s, ',');
        if (first) {
            first = false;
            // Skip a "re,im" (or similar) header line.
            try {
                std::stod(re_s);
            } catch (const std::exception&) {
                continue;
            }
        }
        double re = std::stod(re_s);
        double im = im_s.empty() ? 0.0 : std::stod(im_s);
        vals.emplace_back(re, im);
    }
    return Eigen::Map<const CVec>(vals.data(), Index(vals.size()));
}

bool looks_like_mm(const fs::path& path) {
    std::ifstream in(path);
    std::string head;
    std::getline(in, head);
    return head.rfind("%%MatrixMarket", 0) == 0;
}

}  // namespace

CVec read_complex_vector(const fs::path& path) {
    if (looks_like_mm(path)) {
        CMat M = read_matrix_market(path);
        if (M.cols() != 1) throw std::runtime_error("expected single-column vector: " + path.string());
        return M.col(0);
    }
    return read_csv_vector(path);
}

RVec read_real_vector(const fs::path& path) {
    CVec v = read_complex_vector(path);
    if (v.imag().cwiseAbs().maxCoeff() > 0.0) {
        throw std::runtime_error("expected a real vector: " + path.string());
    }
    return v.real();
}

void write_vector_csv(const fs::path& path, const CVec& v) {
    auto out = open_out(path);
    out << "re,im\n";
    for (Index i = 0; i < v.size(); ++i) {
        out << v[i].real() << "," << v[i].imag() << "\n";
    }
}

void write_image_csv(const fs::path& path, const RVec& data, Index rows, Index cols) {
    if (data.size() != rows * cols) {
        throw std::invalid_argument("write_image_csv: dimension mismatch");
    }
    auto out = open_out(path);
    out << rows << "," << cols << "\n";
    for (Index i = 0; i < data.size(); ++i) out << data[i] << "\n";
}

RVec read_image_csv(const fs::path& path, Index* rows_out, Index* cols_out) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::istringstream hs(line);
    std::string r_s, c_s;
    std::getline(hs, r_s, ',');
    std::getline(hs, c_s, ',');
    Index rows = std::stoll(r_s), cols = std::stoll(c_s);
    RVec data(rows * cols);
    for (Index i = 0; i < data.size(); ++i) in >> data[i];
    if (!in) throw std::runtime_error("truncated image CSV: " + path.string());
    if (rows_out) *rows_out = rows;
    if (cols_out) *cols_out = cols;
    return data;
}

void write_key_values(const fs::path& path, const KeyValues& kv) {
    auto out = open_out(path);
    for (const auto& [key, value] : kv) {
        out << key << " = " << value << "\n";
    }
}

KeyValues read_key_values(const fs::path& path) {
    auto in = open_in(path);
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void write_majorizer(const fs::path& sidecar_path, const MajorizerSpec& M,
                     const std::string& k_descriptor) {
    fs::path d_path = sidecar_path;
    d_path.replace_extension(".d.mm");
    write_vector_mm(d_path, M.d);
    KeyValues kv;
    kv["K"] = k_descriptor;
    kv["d_file"] = d_path.filename().string();
    kv["n"] = std::to_string(M.K->cols());
    {
        std::ostringstream a;
        a.precision(17);
        a << M.alpha;
        kv["alpha"] = a.str();
    }
    kv["certified"] = M.certified ? "true" : "false";
    kv["method"] = to_string(M.method);
    write_key_values(sidecar_path, kv);
}

MajorizerSpec read_majorizer(const fs::path& sidecar_path) {
    auto kv = read_key_values(sidecar_path);
    MajorizerSpec M;
    fs::path d_path = sidecar_path.parent_path() / kv.at("d_file");
    M.d = read_real_vector(d_path);
    M.alpha = std::stod(kv.at("alpha"));
    M.certified = kv.at("certified") == "true";
    M.method = cert_method_from_string(kv.at("method"));
    Index n = kv.count("n") ? std::stoll(kv.at("n")) : -1;
    M.K = parse_k_descriptor(kv.at("K"), n);
    if (M.K->rows() != M.d.size()) {
        throw std::runtime_error("majorizer sidecar: d length does not match K rows");
    }
    return M;
}

namespace {

OpPtr parse_single_k(const std::string& token, Index n) {
    if (token == "identity") {
        if (n <= 0) throw std::invalid_argument("identity descriptor needs a dimension");
        return make_identity(n);
    }
    if (token == "dft") {
        if (n <= 0) throw std::invalid_argument("dft descriptor needs a dimension");
        return make_dft(n);
    }
    if (token.rfind("dft2:", 0) == 0) {
        Index side = std::stoll(token.substr(5));
        return make_dft2(side, side);
    }
    if (token.rfind("projector@", 0) == 0) {
        auto geom = ct::geometry_from_config(token.substr(10));
        if (n > 0 && geom.image_size() != n) {
            throw std::invalid_argument("projector geometry does not match dimension");
        }
        return ct::build_projector(geom);
    }
    if (token.rfind("circulant@", 0) == 0) {
        return make_circulant(read_complex_vector(token.substr(10)));
    }
    throw std::invalid_argument("unknown K descriptor token: " + token);
}

}  // namespace

OpPtr parse_k_descriptor(const std::string& descriptor, Index n) {
    if (descriptor.rfind("stacked:", 0) == 0) {
        std::string rest = descriptor.substr(8);
        std::vector<OpPtr> blocks;
        size_t pos = 0;
        Index cols = n;
        while (pos != std::string::npos) {
            size_t plus = rest.find('+', pos);
            std::string token = rest.substr(pos, plus == std::string::npos
                                                     ? std::string::npos
                                                     : plus - pos);
            OpPtr b = parse_single_k(token, cols);
            cols = b->cols();
            blocks.push_back(std::move(b));
            pos = plus == std::string::npos ? std::string::npos : plus + 1;
        }
        return make_stacked(std::move(blocks));
    }
    return parse_single_k(descriptor, n);
}

}  // namespace majkit::io
