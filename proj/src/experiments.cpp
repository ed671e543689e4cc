#include "majkit/experiments.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "majkit/io.hpp"

namespace majkit::experiments {

RMat weighted_toeplitz(Index n) {
    RMat F(n, n);
    for (Index i = 0; i < n; ++i) {
        double c = std::cos(2.0 * std::numbers::pi * double(i) / double(n));
        double num = 0.1 + c * c;
        for (Index j = 0; j < n; ++j) {
            F(i, j) = num / std::sqrt(1.0 + double(std::abs(i - j)));
        }
    }
    return F;
}

HermPtr parse_h_source(const std::string& source, Index* dim_out) {
    auto set_dim = [&](Index n) { if (dim_out) *dim_out = n; };
    if (source.rfind("diag:", 0) == 0) {
        std::string body = source.substr(5);
        RVec d;
        auto dots = body.find("..");
        if (dots != std::string::npos) {
            Index lo = std::stoll(body.substr(0, dots));
            Index hi = std::stoll(body.substr(dots + 2));
            d = RVec::LinSpaced(hi - lo + 1, double(lo), double(hi));
        } else {
            std::vector<double> vals;
            std::istringstream ss(body);
            std::string tok;
            while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
            d = Eigen::Map<const RVec>(vals.data(), Index(vals.size()));
        }
        set_dim(d.size());
        return make_dense_hermitian(RMat(d.asDiagonal()));
    }
    if (source.rfind("toeplitz:", 0) == 0) {
        std::string body = source.substr(9);
        auto eq = body.find('=');
        Index n = std::stoll(eq == std::string::npos ? body : body.substr(eq + 1));
        RMat F = weighted_toeplitz(n);
        set_dim(n);
        return make_dense_hermitian(RMat(F.transpose() * F));
    }
    CMat H = io::read_matrix_market(source);
    set_dim(H.rows());
    return make_dense_hermitian(std::move(H));
}

void write_trace_csv(const fs::path& path, const ConvergenceTrace& trace) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out.precision(17);
    out << "iter,distance,cost\n";
    for (const auto& r : trace) {
        out << r.iter << "," << r.distance << "," << r.cost << "\n";
    }
}

void write_design_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out.precision(17);
    out << "iter,dual_value,grad_norm\n";
    for (const auto& r : trace) {
        out << r.iter << "," << r.dual_value << "," << r.grad_norm << "\n";
    }
}

void write_ct_trace_csv(const fs::path& path, const std::vector<ct::CTTraceRecord>& trace) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out.precision(17);
    out << "iter,cost,consensus_residual\n";
    for (const auto& r : trace) {
        out << r.iter << "," << r.cost << "," << r.consensus_residual << "\n";
    }
}

void write_spectrum_csv(const fs::path& path, const RVec& spectrum) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out.precision(17);
    for (Index i = 0; i < spectrum.size(); ++i) out << spectrum[i] << "\n";
}

// ---------------------------------------------------------------------------
// Weighted-Toeplitz MM comparison
// ---------------------------------------------------------------------------

namespace {

int iters_to_relative_distance(const ConvergenceTrace& trace, double tol) {
    if (trace.empty() || !(trace.front().distance > 0.0)) return -1;
    double d0 = trace.front().distance;
    for (const auto& r : trace) {
        if (r.distance <= tol * d0) return r.iter;
    }
    return -1;
}

}  // namespace

std::vector<ToeplitzArm> toeplitz_experiment(const ToeplitzConfig& cfg) {
    const Index n = cfg.n;
    RMat F = weighted_toeplitz(n);
    RMat Hd = F.transpose() * F;
    HermPtr H = make_dense_hermitian(Hd);

    std::vector<ToeplitzArm> arms;

    {
        ToeplitzArm arm;
        arm.name = "lipschitz";
        arm.majorizer = lipschitz_majorizer(*H, 1e-3, cfg.seed + 11);
        arms.push_back(std::move(arm));
    }
    {
        ToeplitzArm arm;
        arm.name = "sqs";
        arm.majorizer = sqs_majorizer(*H, /*nonnegative_hint=*/true);
        arms.push_back(std::move(arm));
    }
    {
        ToeplitzArm arm;
        arm.name = "design-diag";
        DesignConfig dc;
        dc.iters = cfg.design_iters;
        dc.seed = cfg.seed + 21;
        dc.cert_mode = CertMode::Power;
        auto res = design(make_design_problem(H, make_identity(n)), dc);
        arm.majorizer = res.majorizer;
        if (!cfg.out_dir.empty()) {
            write_design_trace_csv(cfg.out_dir / "design_diag_trace.csv", res.trace);
        }
        arms.push_back(std::move(arm));
    }
    {
        ToeplitzArm arm;
        arm.name = "design-circ-diag";
        DesignConfig dc;
        dc.iters = cfg.design_iters;
        dc.seed = cfg.seed + 31;
        dc.cert_mode = CertMode::Power;
        OpPtr K = make_stacked({make_dft(n), make_identity(n)});
        auto res = design(make_design_problem(H, K), dc);
        arm.majorizer = res.majorizer;
        if (!cfg.out_dir.empty()) {
            write_design_trace_csv(cfg.out_dir / "design_circ_diag_trace.csv", res.trace);
        }
        arms.push_back(std::move(arm));
    }
    {
        ToeplitzArm arm;
        arm.name = "circ";
        OpPtr C = best_circulant_approx(Hd.cast<Complex>());
        MajorizerSpec M0 = circulant_as_majorizer(C);
        // d can have tiny nonpositive eigenvalues from the projection; floor
        // them so the beta scaling stays well defined.
        double floor = 1e-10 * M0.d.maxCoeff();
        M0.d = M0.d.cwiseMax(floor);
        arm.majorizer = scale_to_majorize(M0, *H, 1e-3, cfg.seed + 41);
        arms.push_back(std::move(arm));
    }

    // Shared quadratic instance: g and x0 zero-mean normal, fixed seed.
    std::mt19937_64 rng(cfg.seed + 99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVec g(n), x0(n);
    for (Index i = 0; i < n; ++i) g[i] = gauss(rng);
    for (Index i = 0; i < n; ++i) x0[i] = gauss(rng);

    Eigen::LDLT<RMat> solver(Hd);
    RVec x_star_r = solver.solve(RVec(-g.real()));
    CVec x_star = x_star_r.cast<Complex>();

    QuadraticProblem q{H, g, x0};
    for (auto& arm : arms) {
        auto v = verify_majorization(arm.majorizer, *H, VerifyMode::Dense);
        arm.min_eig = v.min_eig;
        if (!v.majorizes) {
            throw std::runtime_error("toeplitz experiment: majorizer '" + arm.name +
                                     "' failed verification (min eig " +
                                     std::to_string(v.min_eig) + ")");
        }
        arm.trace = mm_quadratic(q, arm.majorizer, cfg.mm_iters, x_star, 100,
                                 cfg.distance_tol);
        arm.iters_to_tol = iters_to_relative_distance(arm.trace, cfg.distance_tol);
        arm.spectrum = majorized_spectrum(arm.majorizer, *H);
        arm.spectrum_spread = arm.spectrum.maxCoeff() - arm.spectrum.minCoeff();
        if (!cfg.out_dir.empty()) {
            write_trace_csv(cfg.out_dir / (arm.name + "_trace.csv"), arm.trace);
            write_spectrum_csv(cfg.out_dir / (arm.name + "_spectrum.csv"), arm.spectrum);
        }
    }

    if (!cfg.out_dir.empty()) {
        std::ofstream out(cfg.out_dir / "summary.csv");
        out << "majorizer,iters_to_tol,spectrum_spread,min_eig\n";
        out.precision(17);
        for (const auto& arm : arms) {
            out << arm.name << "," << arm.iters_to_tol << ","
                << arm.spectrum_spread << "," << arm.min_eig << "\n";
        }
    }
    return arms;
}

// ---------------------------------------------------------------------------
// CT demo
// ---------------------------------------------------------------------------

CtDemoResult ct_demo(const CtDemoConfig& cfg) {
    CtDemoResult out;
    cfg.geom.validate();

    OpPtr A = ct::build_projector(cfg.geom);
    auto scan = ct::simulate_scan(cfg.geom, A, cfg.noise_level, cfg.seed + 1);

    out.problem.geom = cfg.geom;
    out.problem.A = A;
    out.problem.y = scan.y;
    out.problem.w = scan.w;
    out.problem.reg = cfg.reg;

    // Gamma = median(w) I; majorizers target H_Gamma = A^T Gamma A.
    RVec w_sorted = scan.w;
    std::nth_element(w_sorted.data(), w_sorted.data() + w_sorted.size() / 2,
                     w_sorted.data() + w_sorted.size());
    const double gamma = w_sorted[w_sorted.size() / 2];
    HermPtr H = gram(A, RVec(RVec::Constant(A->rows(), gamma)));

    out.x_fbp = ct::fbp(cfg.geom, A, scan.y);

    const Index npix = cfg.geom.image_size();
    {
        CtDemoArm arm;
        arm.name = "sqs";
        arm.majorizer = sqs_majorizer(*H, /*nonnegative_hint=*/true);
        out.arms.push_back(std::move(arm));
    }
    {
        CtDemoArm arm;
        arm.name = "circ";
        DesignConfig dc;
        dc.iters = cfg.circ_design_iters;
        dc.seed = cfg.seed + 101;
        dc.cert_mode = cfg.cert_mode;
        OpPtr K = make_dft2(cfg.geom.n, cfg.geom.n);
        auto res = design(make_design_problem(H, K), dc);
        arm.majorizer = res.majorizer;
        if (!cfg.out_dir.empty()) {
            write_design_trace_csv(cfg.out_dir / "design_circ_trace.csv", res.trace);
        }
        out.arms.push_back(std::move(arm));
    }
    {
        CtDemoArm arm;
        arm.name = "down";
        DesignConfig dc;
        dc.iters = cfg.down_design_iters;
        dc.seed = cfg.seed + 201;
        dc.cert_mode = cfg.cert_mode;
        OpPtr K = ct::downsampled_K(cfg.geom, cfg.view_factor, cfg.channel_factor);
        auto res = design(make_design_problem(H, K), dc);
        arm.majorizer = res.majorizer;
        if (!cfg.out_dir.empty()) {
            write_design_trace_csv(cfg.out_dir / "design_down_trace.csv", res.trace);
        }
        out.arms.push_back(std::move(arm));
    }

    for (auto& arm : out.arms) {
        auto v = verify_majorization(arm.majorizer, *H, cfg.verify_mode, 1e-8,
                                     Index(npix) * Index(npix));
        arm.min_eig = v.min_eig;
        if (!v.majorizes) {
            throw std::runtime_error("ct demo: majorizer '" + arm.name +
                                     "' failed verification against A^T Gamma A "
                                     "(min eig " + std::to_string(v.min_eig) + ")");
        }
        arm.result = ct::ct_reconstruct(out.problem, arm.majorizer, cfg.outer_iters,
                                        out.x_fbp, cfg.cg_iters);
        arm.final_cost = arm.result.trace.back().cost;
        if (!cfg.out_dir.empty()) {
            write_ct_trace_csv(cfg.out_dir / (arm.name + "_cost.csv"), arm.result.trace);
            io::write_image_csv(cfg.out_dir / (arm.name + "_image.csv"),
                                arm.result.image, cfg.geom.n, cfg.geom.n);
        }
    }

    if (!cfg.out_dir.empty()) {
        // Near-converged reference (no converged ground truth exists for this
        // problem): rerun the best-performing arm with 10x the outer budget.
        const CtDemoArm* best = &out.arms.front();
        for (const auto& arm : out.arms) {
            if (arm.final_cost < best->final_cost) best = &arm;
        }
        auto ref = ct::ct_reconstruct(out.problem, best->majorizer,
                                      10 * cfg.outer_iters, out.x_fbp, cfg.cg_iters);
        write_ct_trace_csv(cfg.out_dir / "reference_cost.csv", ref.trace);
        io::write_image_csv(cfg.out_dir / "reference_image.csv", ref.image,
                            cfg.geom.n, cfg.geom.n);
        io::write_image_csv(cfg.out_dir / "fbp_image.csv", out.x_fbp,
                            cfg.geom.n, cfg.geom.n);
        io::write_image_csv(cfg.out_dir / "phantom.csv", scan.x_true,
                            cfg.geom.n, cfg.geom.n);
        io::write_image_csv(cfg.out_dir / "sinogram.csv", scan.y,
                            cfg.geom.n_views, cfg.geom.n_channels);
        std::ofstream report(cfg.out_dir / "verification.csv");
        report.precision(17);
        report << "majorizer,min_eig,final_cost\n";
        for (const auto& arm : out.arms) {
            report << arm.name << "," << arm.min_eig << "," << arm.final_cost << "\n";
        }
    }
    return out;
}

CtDemoConfig ct_demo_config_from_file(const fs::path& config) {
    auto kv = io::read_key_values(config);
    CtDemoConfig cfg;
    if (kv.count("n")) cfg.geom.n = std::stoll(kv.at("n"));
    if (kv.count("n_views")) cfg.geom.n_views = std::stoll(kv.at("n_views"));
    if (kv.count("n_channels")) cfg.geom.n_channels = std::stoll(kv.at("n_channels"));
    if (kv.count("seed")) cfg.seed = std::stoull(kv.at("seed"));
    if (kv.count("noise_level")) cfg.noise_level = std::stod(kv.at("noise_level"));
    if (kv.count("delta")) cfg.reg.delta = std::stod(kv.at("delta"));
    if (kv.count("strength")) cfg.reg.strength = std::stod(kv.at("strength"));
    if (kv.count("outer_iters")) cfg.outer_iters = std::stoi(kv.at("outer_iters"));
    if (kv.count("design_iters")) {
        cfg.circ_design_iters = std::stoi(kv.at("design_iters"));
        cfg.down_design_iters = cfg.circ_design_iters;
    }
    if (kv.count("circ_design_iters"))
        cfg.circ_design_iters = std::stoi(kv.at("circ_design_iters"));
    if (kv.count("down_design_iters"))
        cfg.down_design_iters = std::stoi(kv.at("down_design_iters"));
    if (kv.count("cg_iters")) cfg.cg_iters = std::stoi(kv.at("cg_iters"));
    if (kv.count("view_factor")) cfg.view_factor = std::stod(kv.at("view_factor"));
    if (kv.count("channel_factor")) cfg.channel_factor = std::stod(kv.at("channel_factor"));
    if (kv.count("cert")) cfg.cert_mode = cert_mode_from_string(kv.at("cert"));
    return cfg;
}

}  // namespace majkit::experiments
