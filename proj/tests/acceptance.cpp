// Acceptance gate: one PASS/FAIL line per criterion; exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "mccs/mccs.hpp"
#include "oracles.hpp"

using namespace mccs;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void report(int id, bool pass, const std::string &detail) {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char *f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Cauchy-Schwarz normalized adjoint defect.
double defect(cplx lhs, cplx rhs, double ax_norm, double y_norm, double x_norm, double aty_norm) {
    const double scale = 0.5 * (ax_norm * y_norm + x_norm * aty_norm);
    return scale > 0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs);
}

SamplingMask random_mask(Index rows, Index cols, Rng &rng) {
    std::vector<bool> kept(static_cast<std::size_t>(rows * cols));
    for (auto &&k : kept) k = rng.uniform() < 0.4;
    return SamplingMask(rows, cols, kept);
}

void criterion_1() {
    const auto t0 = Clock::now();
    Rng rng(1001);
    double worst = 0.0;
    std::string worst_op;
    const auto track = [&](double d, const char *name) {
        if (d > worst) {
            worst = d;
            worst_op = name;
        }
    };
    for (int t = 0; t < 100; ++t) {
        const Index r = 8 + 2 * static_cast<Index>(rng.uniform() * 6);
        const Index c = 8 + 2 * static_cast<Index>(rng.uniform() * 6);
        {
            const auto x = oracle::random_grid(r, c, rng), y = oracle::random_grid(r, c, rng);
            const auto ax = dft2_centered(x), aty = idft2_centered(y);
            track(defect(inner(ax.values(), y.values()), inner(x.values(), aty.values()), ax.norm(),
                         y.norm(), x.norm(), aty.norm()),
                  "dft2");
        }
        {
            const Index n = 16 * (1 + static_cast<Index>(rng.uniform() * 2));
            const WaveletPlan plan(n, n, 1 + static_cast<int>(rng.uniform() * 3));
            const auto x = oracle::random_grid(n, n, rng), y = oracle::random_grid(n, n, rng);
            const auto ax = dwt2_d4(x, plan), aty = idwt2_d4(y, plan);
            track(defect(inner(ax.values(), y.values()), inner(x.values(), aty.values()), ax.norm(),
                         y.norm(), x.norm(), aty.norm()),
                  "dwt2_d4");
        }
        {
            const Index pr = 3 + static_cast<Index>(rng.uniform() * 9);
            const Index pc = 3 + static_cast<Index>(rng.uniform() * 9);
            const auto x = oracle::random_grid(pr, pc, rng), y = oracle::random_grid(2 * pr, 2 * pc, rng);
            const auto ax = zero_pad_embed(x), aty = crop_center(y, pr, pc);
            track(defect(inner(ax.values(), y.values()), inner(x.values(), aty.values()), ax.norm(),
                         y.norm(), x.norm(), aty.norm()),
                  "zero_pad/crop");
        }
        const Index coils = 1 + static_cast<Index>(rng.uniform() * 8);
        const auto mask = random_mask(r, c, rng);
        const CMat m = oracle::random_cmat(coils, coils, rng);
        const CMat w = cholesky_whitener(m * m.adjoint() + CMat::Identity(coils, coils)).whitener;
        CMat smat = oracle::random_cmat(r * c, coils, rng);
        smat = smat.unaryExpr([](cplx z) { return std::abs(z) > 1 ? z / std::abs(z) : z; });
        const SensitivityMaps s(CoilStack(r, c, smat, Domain::image));
        const CMat y = oracle::random_cmat(r * c, coils, rng);
        {
            const auto x = oracle::random_grid(r, c, rng);
            const CMat ax = apply_E_image(x, s, mask, w);
            const auto aty = adjoint_E_image(y, s, mask, w);
            track(defect(oracle::cinner(ax, y), inner(x.values(), aty.values()), ax.norm(), y.norm(),
                         x.norm(), aty.norm()),
                  "E_x");
        }
        {
            const auto img = oracle::random_grid(r, c, rng);
            const CMat sm = oracle::random_cmat(r * c, coils, rng);
            const CMat ax = apply_E_maps(sm, img, mask, w);
            const CMat aty = adjoint_E_maps(y, img, mask, w);
            track(defect(oracle::cinner(ax, y), oracle::cinner(sm, aty), ax.norm(), y.norm(), sm.norm(),
                         aty.norm()),
                  "E_s");
        }
        {
            const BandwidthOp band(r, c, 0.5 * rng.uniform());
            const CMat sm = oracle::random_cmat(r * c, coils, rng);
            const CMat yy = oracle::random_cmat(4 * r * c, coils, rng);
            const CMat ax = band.apply(sm), aty = band.adjoint(yy);
            track(defect(oracle::cinner(ax, yy), oracle::cinner(sm, aty), ax.norm(), yy.norm(),
                         sm.norm(), aty.norm()),
                  "bandwidth");
        }
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-10 && secs < 10.0,
           "max relative adjoint defect " + fmt("%.2e", worst) + " (" + worst_op + "), " +
               fmt("%.2f s", secs));
}

void criterion_2() {
    const auto t0 = Clock::now();
    Rng rng(1002);
    double worst_f = 0.0, worst_w = 0.0, worst_detail = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Index r = 4 + static_cast<Index>(rng.uniform() * 60);
        const Index c = 4 + static_cast<Index>(rng.uniform() * 60);
        const auto x = oracle::random_grid(r, c, rng);
        worst_f = std::max(worst_f, std::abs(dft2_centered(x).norm() / x.norm() - 1.0));
        const Index n = 8 << static_cast<int>(rng.uniform() * 3);
        const WaveletPlan plan(n, 2 * n, WaveletPlan::default_levels(n, 2 * n));
        const auto z = oracle::random_grid(n, 2 * n, rng);
        worst_w = std::max(worst_w, std::abs(dwt2_d4(z, plan).norm() / z.norm() - 1.0));
        const auto w = dwt2_d4(ComplexGrid::constant(n, 2 * n, rng.complex_normal()), plan);
        const Index lr = n >> plan.levels(), lc = (2 * n) >> plan.levels();
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < 2 * n; ++j)
                if (i >= lr || j >= lc) worst_detail = std::max(worst_detail, std::abs(w(i, j)));
    }
    const double secs = seconds_since(t0);
    report(2, worst_f <= 1e-12 && worst_w <= 1e-12 && worst_detail <= 1e-12 && secs < 5.0,
           "dft norm dev " + fmt("%.2e", worst_f) + ", wavelet norm dev " + fmt("%.2e", worst_w) +
               ", detail of constants " + fmt("%.2e", worst_detail) + ", " + fmt("%.2f s", secs));
}

void criterion_3() {
    using Eigen::MatrixXd;
    using Eigen::VectorXd;
    const auto t0 = Clock::now();
    double gap_fista = 0.0, gap_pdhg = 0.0;
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        Rng rng(3000 + seed);
        MatrixXd A(12, 20);
        VectorXd b(12);
        for (Index i = 0; i < A.size(); ++i) A.data()[i] = rng.normal();
        for (Index i = 0; i < 12; ++i) b(i) = rng.normal();
        const double lambda = 0.3;
        const auto soft = [](const VectorXd &v, double t) {
            return VectorXd(v.unaryExpr(
                [t](double a) { return std::copysign(std::max(std::abs(a) - t, 0.0), a); }));
        };
        SmoothFn<VectorXd> f;
        f.value = [&](const VectorXd &x) { return 0.5 * (A * x - b).squaredNorm(); };
        f.gradient = [&](const VectorXd &x) { return VectorXd(A.transpose() * (A * x - b)); };
        ProxFn<VectorXd> l1;
        l1.value = [&](const VectorXd &x) { return lambda * x.lpNorm<1>(); };
        l1.prox = [&](const VectorXd &v, double t) { return soft(v, t * lambda); };
        ProxFn<VectorXd> data;
        data.value = [&](const VectorXd &y) { return 0.5 * (y - b).squaredNorm(); };
        data.prox = [&](const VectorXd &v, double t) { return VectorXd((v + t * b) / (1.0 + t)); };
        LinOp<VectorXd, VectorXd> op;
        op.apply = [&](const VectorXd &x) { return VectorXd(A * x); };
        op.adjoint = [&](const VectorXd &y) { return VectorXd(A.transpose() * y); };

        const double ref =
            oracle::lasso_objective(A, b, lambda, oracle::lasso_coordinate_descent(A, b, lambda));
        FistaParams fp;
        fp.max_iterations = 200;
        const auto fi = fista_ls_restart(f, l1, VectorXd(VectorXd::Zero(20)), fp);
        gap_fista = std::max(gap_fista, oracle::lasso_objective(A, b, lambda, fi.x) - ref);
        PdhgParams pp;
        pp.max_iterations = 2000;
        const auto pd = pdhg_adaptive(l1, data, op, VectorXd(VectorXd::Zero(20)), VectorXd(VectorXd::Zero(12)), pp);
        gap_pdhg = std::max(gap_pdhg, oracle::lasso_objective(A, b, lambda, pd.x) - ref);
    }
    const double secs = seconds_since(t0);
    report(3, gap_fista <= 1e-6 && gap_pdhg <= 1e-6 && secs < 30.0,
           "objective gap FISTA(200) " + fmt("%.2e", gap_fista) + ", PDHG(2000) " +
               fmt("%.2e", gap_pdhg) + ", " + fmt("%.2f s", secs));
}

void criterion_4() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int segments : {64, 96, 128, 256}) {
        Loop loop;
        loop.center = {0.0, 0.0, 0.0};
        loop.axis_u = {1, 0, 0};
        loop.axis_w = {0, 1, 0};
        loop.radius = 0.08;
        loop.segments = segments;
        loop.current = 1.0;
        const double expect = mu0 * loop.current / (2.0 * loop.radius);
        worst = std::max(worst, std::abs(loop_field(loop, loop.center).b.norm() / expect - 1.0));
    }
    const double secs = seconds_since(t0);
    report(4, worst <= 0.005 && secs < 1.0,
           "max relative error vs mu0 I/(2a) " + fmt("%.2e", worst) + ", " + fmt("%.3f s", secs));
}

double concentration(const ComplexGrid &map, double cutoff) {
    const auto k = dft2_centered(map);
    double inside = 0.0;
    for (Index r = 0; r < k.rows(); ++r)
        for (Index c = 0; c < k.cols(); ++c)
            if (BandwidthOp::normalized_radius(r, c, k.rows(), k.cols()) <= cutoff)
                inside += std::norm(k(r, c));
    return inside / k.values().squaredNorm();
}

void criterion_5() {
    const auto t0 = Clock::now();
    const auto sim = biot_savart_maps(CoilGeometry{}, 64, 64, 0.24);
    const auto coupled = couple_maps_rank(sim.maps, 5);
    double worst = 1.0;
    for (Index c = 0; c < 8; ++c) {
        worst = std::min(worst, concentration(sim.maps.map(c), 0.15));
        worst = std::min(worst, concentration(coupled.map(c), 0.15));
    }
    const double secs = seconds_since(t0);
    report(5, worst >= 0.95 && secs < 5.0,
           "min energy fraction within radius 0.15 " + fmt("%.4f", worst) + ", " +
               fmt("%.2f s", secs));
}

void criterion_6() {
    const auto t0 = Clock::now();
    const auto sim = biot_savart_maps(CoilGeometry{}, 64, 64, 0.24);
    const auto coupled = couple_maps_rank(sim.maps, 5);
    const Eigen::JacobiSVD<CMat> svd(coupled.matrix());
    const RVec sv = svd.singularValues();
    const double ratio = sv.tail(3).maxCoeff() / sv(0);
    const double secs = seconds_since(t0);
    report(6, ratio <= 1e-10 && secs < 2.0,
           "max(s6..s8)/s1 " + fmt("%.2e", ratio) + ", " + fmt("%.2f s", secs));
}

struct Instance {
    ComplexGrid phantom;
    MultiCoilKSpace b;
};

Instance simulated(double fraction, double snr, std::uint64_t mask_seed, std::uint64_t noise_seed) {
    const auto phantom = shepp_logan_phantom(64, 64);
    const auto maps = couple_maps_rank(biot_savart_maps(CoilGeometry{}, 64, 64, 0.24).maps, 5);
    MaskSpec spec;
    spec.fraction = fraction;
    spec.seed = mask_seed;
    return {phantom, synthesize_kspace(phantom, maps, laplacian_mask(spec), CMat::Identity(8, 8),
                                       snr, noise_seed)};
}

ReconConfig reduced_budget() {
    ReconConfig cfg;
    cfg.outer_iterations = 15;
    cfg.pdhg_iterations = 60;
    cfg.fista_iterations = 20;
    return cfg;
}

void criterion_7() {
    const auto t0 = Clock::now();
    const ReconConfig cfg = reduced_budget();
    const auto n = NoiseCovariance::identity(8);
    bool ordered = true;
    double zf15 = 0.0, mccs15 = 0.0;
    std::string detail;
    for (double fraction : {0.15, 0.25, 0.35}) {
        const auto in = simulated(fraction, 30.0, 7, 11);
        const double zf = evaluate_images(zero_filled_sos(in.b), in.phantom).mse;
        const double ss =
            evaluate_images(sparse_sense_reconstruct(in.b, init_sensitivity(in.b, cfg.lpf_sigma), n, cfg),
                            in.phantom)
                .mse;
        const double mc = evaluate_images(mccs_reconstruct(in.b, n, cfg).image, in.phantom).mse;
        ordered = ordered && mc <= zf && mc <= ss;
        if (fraction == 0.15) {
            zf15 = zf;
            mccs15 = mc;
        }
        char buf[160];
        std::snprintf(buf, sizeof buf, "[%2.0f%%: zf %.3e ss %.3e mccs %.3e] ", 100 * fraction, zf, ss,
                      mc);
        detail += buf;
    }
    const double secs = seconds_since(t0);
    const bool ratio = mccs15 <= 0.6 * zf15;
    report(7, ordered && ratio && secs < 600.0,
           detail + "mccs/zf at 15% " + fmt("%.3f", mccs15 / zf15) + ", " + fmt("%.1f s", secs));
}

void criterion_8() {
    const auto t0 = Clock::now();
    const auto in = simulated(0.30, std::numeric_limits<double>::infinity(), 7, 11);
    const auto res = mccs_reconstruct(in.b, NoiseCovariance::identity(8), reduced_budget());
    const double tol = 1e-6 * res.trace.front();
    double worst_rise = 0.0;
    for (std::size_t k = 1; k < res.trace.size(); ++k)
        worst_rise = std::max(worst_rise, res.trace[k] - res.trace[k - 1]);
    report(8, worst_rise <= tol,
           "largest increase " + fmt("%.3e", worst_rise) + " vs tolerance " + fmt("%.3e", tol) +
               " over " + std::to_string(res.trace.size()) + " outer iterations, " +
               fmt("%.1f s", seconds_since(t0)));
}

std::string read_all(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_9() {
    const auto t0 = Clock::now();
    const auto root = fs::temp_directory_path() / "mccs_acceptance";
    fs::remove_all(root);
    bool same = true;
    std::string detail;
    nlohmann::json reports[2];
    for (int run = 0; run < 2; ++run) {
        const auto dir = root / ("run" + std::to_string(run));
        auto sim = cli::parse_simulate(nlohmann::json::parse(R"({"seed": 21, "mask": {"fraction": 0.3}})"));
        cli::cmd_simulate(sim, dir.string());
        auto rc = cli::parse_reconstruct(nlohmann::json{
            {"kspace", (dir / "kspace.cxt").string()},
            {"reference", (dir / "phantom.cxt").string()},
            {"method", "mccs"},
            {"recon", {{"outer_iterations", 3}, {"pdhg_iterations", 20}, {"fista_iterations", 10}}}});
        reports[run] = cli::cmd_reconstruct(rc, dir.string());
    }
    for (const char *f : {"phantom.cxt", "maps.cxt", "mask.cxt", "kspace.cxt", "recon.cxt"}) {
        if (read_all(root / "run0" / f) != read_all(root / "run1" / f)) {
            same = false;
            detail += std::string(f) + " differs; ";
        }
    }
    for (const char *key : {"metrics", "trace", "iterations"}) {
        if (reports[0][key] != reports[1][key]) {
            same = false;
            detail += std::string("report ") + key + " differs; ";
        }
    }
    if (same) detail = "all .cxt outputs and report metrics bit-identical; ";
    report(9, same, detail + fmt("%.1f s", seconds_since(t0)));
}

} // namespace

int main() {
    const std::vector<std::function<void()>> criteria = {criterion_1, criterion_2, criterion_3,
                                                         criterion_4, criterion_5, criterion_6,
                                                         criterion_7, criterion_8, criterion_9};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception &e) {
            report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures;
}
