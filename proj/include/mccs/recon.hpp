#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mccs/model.hpp"
#include "mccs/prox.hpp"
#include "mccs/solvers.hpp"
#include "mccs/tensor.hpp"
#include "mccs/transforms.hpp"

namespace mccs {

struct ReconConfig {
    double lambda_x = 1e-4;       ///< wavelet sparsity weight
    double lambda_s = 1e-3;       ///< nuclear-norm weight on the map matrix
    double lambda_s_tilde = 10.0; ///< bandwidth penalty weight
    /// When set, the three lambdas are multiples of ||L^* b|| for the data
    /// being reconstructed rather than absolute weights.
    bool relative_weights = true;
    double cutoff = 0.1;          ///< k_c, normalized radial frequency on the padded grid
    int outer_iterations = 50;
    int pdhg_iterations = 90;
    int fista_iterations = 30;
    /// FISTA budget for the fixed-map SparseSENSE baseline.
    int baseline_fista_iterations = 300;
    int wavelet_levels = 0; ///< 0 selects the default depth
    double lpf_sigma = 0.05; ///< Gaussian low-pass width for map initialization
    std::uint64_t seed = 0;
    /// Carry the PDHG dual variable from one outer iteration to the next.
    bool warm_start_dual = true;
    FistaParams fista{};
    PdhgParams pdhg{};

    void validate() const {
        if (lambda_x < 0 || lambda_s < 0 || lambda_s_tilde < 0)
            throw ConfigError("regularization weights must be nonnegative");
        if (!(cutoff >= 0.0 && cutoff <= 0.5)) throw ConfigError("cutoff must lie in [0, 0.5]");
        if (outer_iterations < 1 || pdhg_iterations < 1 || fista_iterations < 1 ||
            baseline_fista_iterations < 1)
            throw ConfigError("iteration counts must be >= 1");
        if (wavelet_levels < 0) throw ConfigError("wavelet levels must be >= 0");
        if (!(lpf_sigma > 0.0)) throw ConfigError("lpf_sigma must be positive");
    }
};

/// Copy of cfg with absolute weights for data b (identity when the weights
/// are already absolute).
inline ReconConfig resolve_weights(const ReconConfig &cfg, const MultiCoilKSpace &b,
                                   const NoiseCovariance &n) {
    if (!cfg.relative_weights) return cfg;
    const double scale = whiten_data(b, n.whitener).norm();
    ReconConfig out = cfg;
    out.lambda_x *= scale;
    out.lambda_s *= scale;
    out.lambda_s_tilde *= scale;
    out.relative_weights = false;
    return out;
}

struct OuterIterate {
    double objective = 0.0;
    int fista_iterations = 0;
    int pdhg_iterations = 0;
    int pdhg_inner_caps = 0;
    int fista_restarts = 0;
};

struct ReconResult {
    ComplexGrid image;
    SensitivityMaps maps;
    std::vector<double> trace; ///< composite objective after each outer iteration
    std::vector<OuterIterate> details;
    double wall_seconds = 0.0;
};

namespace detail {

inline CVec flatten(const CMat &m) { return Eigen::Map<const CVec>(m.data(), m.size()); }
inline CMat unflatten(const CVec &v, Index rows, Index cols) {
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

inline double l1_wavelet(const ComplexGrid &x, const WaveletPlan &plan) {
    return dwt2_d4(x, plan).values().cwiseAbs().sum();
}

/// prox of t*lambda*||W x||_1 through the orthonormal transform.
inline CVec prox_wavelet_l1(const CVec &v, double t, double lambda, const WaveletPlan &plan) {
    if (lambda == 0.0) return v;
    const ComplexGrid w = dwt2_d4(ComplexGrid(plan.rows(), plan.cols(), v), plan);
    const ComplexGrid shrunk(plan.rows(), plan.cols(), prox_l1_complex(w.values(), t * lambda),
                             Domain::wavelet);
    return idwt2_d4(shrunk, plan).values();
}

inline double whitener_norm_sq(const CMat &whitener) {
    Eigen::JacobiSVD<CMat> svd(whitener);
    const double n = svd.singularValues()(0);
    return n * n;
}

} // namespace detail

inline WaveletPlan wavelet_plan_for(Index rows, Index cols, const ReconConfig &cfg) {
    return WaveletPlan::for_grid(rows, cols, cfg.wavelet_levels);
}

/// Composite objective 1/2||E_x x - L^*b||^2 + lambda_x||Wx||_1
/// + lambda_s||S||_* + lambda_s~/2 ||D_c F pad s||^2.
inline double composite_objective(const MultiCoilKSpace &b, const NoiseCovariance &n,
                                  const ComplexGrid &x, const SensitivityMaps &s,
                                  const ReconConfig &cfg_in) {
    const ReconConfig cfg = resolve_weights(cfg_in, b, n);
    const CMat lb = whiten_data(b, n.whitener);
    double obj = 0.5 * (apply_E_image(x, s, b.mask(), n.whitener) - lb).squaredNorm();
    if (cfg.lambda_x > 0)
        obj += cfg.lambda_x * detail::l1_wavelet(x, wavelet_plan_for(x.rows(), x.cols(), cfg));
    if (cfg.lambda_s > 0) obj += cfg.lambda_s * nuclear_norm(s.matrix());
    if (cfg.lambda_s_tilde > 0) {
        const BandwidthOp band(x.rows(), x.cols(), cfg.cutoff);
        obj += 0.5 * cfg.lambda_s_tilde * band.apply(s.matrix()).squaredNorm();
    }
    return obj;
}

/// Zero-filled coil images: idft2 of each measured plane.
inline CoilStack zero_filled_images(const MultiCoilKSpace &b) {
    return CoilStack(b.rows(), b.cols(), idft2_columns(b.matrix(), b.rows(), b.cols()),
                     Domain::image);
}

inline ComplexGrid zero_filled_sos(const MultiCoilKSpace &b) {
    return sos_combine(zero_filled_images(b));
}

/// Zero-filled images divided by their SoS (zero where SoS < 1e-8 max),
/// Gaussian low-pass filtered in k-space, then clamped to the unit disk.
inline SensitivityMaps init_sensitivity(const MultiCoilKSpace &b, double lpf_sigma = 0.05) {
    if (!(lpf_sigma > 0.0)) throw ConfigError("lpf_sigma must be positive");
    if (b.matrix().cwiseAbs().maxCoeff() == 0.0)
        throw NumericError("init_sensitivity: k-space data are all zero");
    const CoilStack zf = zero_filled_images(b);
    const RVec sos = zf.matrix().rowwise().squaredNorm().cwiseSqrt();
    const double floor = 1e-8 * sos.maxCoeff();
    CMat ratio(zf.pixels(), zf.coils());
    for (Index i = 0; i < zf.pixels(); ++i) {
        if (sos(i) < floor)
            ratio.row(i).setZero();
        else
            ratio.row(i) = zf.matrix().row(i) / sos(i);
    }
    CMat k = dft2_columns(ratio, b.rows(), b.cols());
    for (Index r = 0; r < b.rows(); ++r) {
        const double fy = static_cast<double>(r - b.rows() / 2) / static_cast<double>(b.rows());
        for (Index c = 0; c < b.cols(); ++c) {
            const double fx =
                static_cast<double>(c - b.cols() / 2) / static_cast<double>(b.cols());
            k.row(r * b.cols() + c) *= std::exp(-(fx * fx + fy * fy) / (2 * lpf_sigma * lpf_sigma));
        }
    }
    CMat smooth = idft2_columns(k, b.rows(), b.cols());
    CVec flat = project_unit_disk(detail::flatten(smooth));
    return SensitivityMaps(
        CoilStack(b.rows(), b.cols(), detail::unflatten(flat, zf.pixels(), zf.coils()),
                  Domain::image));
}

struct ImageSolve {
    ComplexGrid image;
    FistaTrace trace;
};

/// FISTA on 1/2||E_x x - L^*b||^2 + lambda_x ||W x||_1, warm-started at x_init.
inline ImageSolve solve_image_subproblem_traced(const MultiCoilKSpace &b,
                                                const SensitivityMaps &s,
                                                const NoiseCovariance &n,
                                                const ComplexGrid &x_init,
                                                const ReconConfig &cfg_in, int iterations) {
    const ReconConfig cfg = resolve_weights(cfg_in, b, n);
    if (!x_init.same_shape(ComplexGrid(s.rows(), s.cols())) || b.rows() != s.rows() ||
        b.cols() != s.cols())
        throw DimensionError("image subproblem: grid dimensions differ");
    const Index rows = s.rows(), cols = s.cols();
    const CMat lb = whiten_data(b, n.whitener);
    const WaveletPlan plan = wavelet_plan_for(rows, cols, cfg);
    const SamplingMask &mask = b.mask();
    const CMat &w = n.whitener;

    SmoothFn<CVec> f;
    f.value = [&](const CVec &x) {
        return 0.5 * (apply_E_image(ComplexGrid(rows, cols, x), s, mask, w) - lb).squaredNorm();
    };
    f.value_and_gradient = [&](const CVec &x) {
        const CMat r = apply_E_image(ComplexGrid(rows, cols, x), s, mask, w) - lb;
        return std::pair<double, CVec>{0.5 * r.squaredNorm(),
                                       adjoint_E_image(r, s, mask, w).values()};
    };
    ProxFn<CVec> g;
    const double lx = cfg.lambda_x;
    g.value = [&](const CVec &x) {
        return lx > 0 ? lx * detail::l1_wavelet(ComplexGrid(rows, cols, x), plan) : 0.0;
    };
    g.prox = [&](const CVec &v, double t) { return detail::prox_wavelet_l1(v, t, lx, plan); };

    FistaParams p = cfg.fista;
    p.max_iterations = iterations;
    // 1/Lipschitz bound: ||E_x||^2 <= ||L||^2 max_i sum_c |s_ic|^2.
    const double lip =
        detail::whitener_norm_sq(w) * s.matrix().rowwise().squaredNorm().maxCoeff();
    p.t0 = lip > 0 ? 1.0 / lip : 1.0;
    auto res = fista_ls_restart(f, g, x_init.values(), p);
    return {ComplexGrid(rows, cols, std::move(res.x), Domain::image), std::move(res.trace)};
}

inline ComplexGrid solve_image_subproblem(const MultiCoilKSpace &b, const SensitivityMaps &s,
                                          const NoiseCovariance &n, const ComplexGrid &x_init,
                                          const ReconConfig &cfg) {
    return solve_image_subproblem_traced(b, s, n, x_init, cfg, cfg.fista_iterations).image;
}

struct MapsSolve {
    SensitivityMaps maps;
    CVec dual;
    PdhgTrace trace;
};

/// PDHG on f(s) + g(A s) with f the unit-disk indicator and
/// A s = (E_s s, D_c F pad s, s), g = data fit + bandwidth + nuclear norm.
/// Blocks whose weight is zero are left out of A.
inline MapsSolve solve_maps_subproblem_traced(const MultiCoilKSpace &b, const ComplexGrid &x,
                                              const NoiseCovariance &n,
                                              const SensitivityMaps &s_init,
                                              const ReconConfig &cfg_in,
                                              const CVec *dual_init = nullptr) {
    const ReconConfig cfg = resolve_weights(cfg_in, b, n);
    const Index rows = x.rows(), cols = x.cols(), pixels = rows * cols, coils = s_init.coils();
    if (s_init.rows() != rows || s_init.cols() != cols || b.rows() != rows || b.cols() != cols)
        throw DimensionError("maps subproblem: grid dimensions differ");
    if (b.coils() != coils) throw DimensionError("maps subproblem: coil counts differ");
    const CVec lb = detail::flatten(whiten_data(b, n.whitener));
    const SamplingMask &mask = b.mask();
    const CMat &w = n.whitener;
    const bool use_band = cfg.lambda_s_tilde > 0;
    const bool use_nuc = cfg.lambda_s > 0;
    const std::optional<BandwidthOp> band =
        use_band ? std::optional<BandwidthOp>(BandwidthOp(rows, cols, cfg.cutoff)) : std::nullopt;

    const Index n1 = pixels * coils;
    const Index n2 = use_band ? 4 * pixels * coils : 0;
    const Index n3 = use_nuc ? pixels * coils : 0;
    const Index off2 = n1, off3 = n1 + n2, total = n1 + n2 + n3;

    LinOp<CVec, CVec> A;
    A.apply = [&](const CVec &sv) {
        const CMat sm = detail::unflatten(sv, pixels, coils);
        CVec out(total);
        out.segment(0, n1) = detail::flatten(apply_E_maps(sm, x, mask, w));
        if (use_band) out.segment(off2, n2) = detail::flatten(band->apply(sm));
        if (use_nuc) out.segment(off3, n3) = sv;
        return out;
    };
    A.adjoint = [&](const CVec &y) {
        CMat acc = adjoint_E_maps(detail::unflatten(y.segment(0, n1), pixels, coils), x, mask, w);
        if (use_band) acc += band->adjoint(detail::unflatten(y.segment(off2, n2), 4 * pixels, coils));
        CVec out = detail::flatten(acc);
        if (use_nuc) out += y.segment(off3, n3);
        return out;
    };

    ProxFn<CVec> f;
    f.value = [](const CVec &sv) {
        return sv.cwiseAbs().maxCoeff() <= 1.0 + SensitivityMaps::magnitude_tolerance
                   ? 0.0
                   : std::numeric_limits<double>::infinity();
    };
    f.prox = [](const CVec &v, double) { return project_unit_disk(v); };

    ProxFn<CVec> g;
    const double ls = cfg.lambda_s, lt = cfg.lambda_s_tilde;
    g.value = [&](const CVec &y) {
        double v = 0.5 * (y.segment(0, n1) - lb).squaredNorm();
        if (use_band) v += 0.5 * lt * y.segment(off2, n2).squaredNorm();
        if (use_nuc) v += ls * nuclear_norm(detail::unflatten(y.segment(off3, n3), pixels, coils));
        return v;
    };
    g.prox = [&](const CVec &v, double t) {
        CVec out(total);
        out.segment(0, n1) = prox_quadratic_data(CVec(v.segment(0, n1)), t, lb);
        if (use_band) out.segment(off2, n2) = prox_scaled_sq(CVec(v.segment(off2, n2)), t, lt);
        if (use_nuc)
            out.segment(off3, n3) = detail::flatten(
                prox_nuclear(detail::unflatten(v.segment(off3, n3), pixels, coils), t * ls));
        return out;
    };

    const CVec s0 = detail::flatten(s_init.matrix());
    const CVec y0 = (dual_init && dual_init->size() == total) ? *dual_init : CVec(CVec::Zero(total));
    PdhgParams p = cfg.pdhg;
    p.max_iterations = cfg.pdhg_iterations;
    auto res = pdhg_adaptive(f, g, A, s0, y0, p);
    SensitivityMaps maps(CoilStack(rows, cols, detail::unflatten(res.x, pixels, coils),
                                   Domain::image));
    return {std::move(maps), std::move(res.y), std::move(res.trace)};
}

inline SensitivityMaps solve_maps_subproblem(const MultiCoilKSpace &b, const ComplexGrid &x,
                                             const NoiseCovariance &n,
                                             const SensitivityMaps &s_init,
                                             const ReconConfig &cfg) {
    return solve_maps_subproblem_traced(b, x, n, s_init, cfg).maps;
}

/// Alternating minimization: x0 = 1, s0 = init_sensitivity(b); each outer
/// iteration solves for the maps (PDHG, warm start s^{k-1}) and then for
/// the image (FISTA, warm start x^{k-1}).
inline ReconResult mccs_reconstruct(const MultiCoilKSpace &b, const NoiseCovariance &n,
                                    const ReconConfig &cfg_in) {
    cfg_in.validate();
    const ReconConfig cfg = resolve_weights(cfg_in, b, n);
    const auto start = std::chrono::steady_clock::now();
    ReconResult out;
    out.image = ComplexGrid::constant(b.rows(), b.cols(), cplx(1.0));
    out.maps = init_sensitivity(b, cfg.lpf_sigma);
    CVec dual;
    for (int k = 1; k <= cfg.outer_iterations; ++k) {
        OuterIterate it;
        try {
            auto ms = solve_maps_subproblem_traced(b, out.image, n, out.maps, cfg,
                                                   cfg.warm_start_dual ? &dual : nullptr);
            out.maps = std::move(ms.maps);
            dual = std::move(ms.dual);
            it.pdhg_iterations = static_cast<int>(ms.trace.iterations.size());
            for (const auto &pi : ms.trace.iterations) it.pdhg_inner_caps += pi.inner_cap ? 1 : 0;

            auto is = solve_image_subproblem_traced(b, out.maps, n, out.image, cfg,
                                                    cfg.fista_iterations);
            out.image = std::move(is.image);
            it.fista_iterations = static_cast<int>(is.trace.iterations.size());
            for (const auto &fi : is.trace.iterations) it.fista_restarts += fi.restarted ? 1 : 0;
        } catch (const Error &e) {
            throw SolverError("outer iteration " + std::to_string(k) + ": " + e.what());
        }
        it.objective = composite_objective(b, n, out.image, out.maps, cfg);
        out.trace.push_back(it.objective);
        out.details.push_back(it);
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

/// SparseSENSE baseline: one image solve with the maps held fixed, started
/// from zero.
inline ComplexGrid sparse_sense_reconstruct(const MultiCoilKSpace &b,
                                            const SensitivityMaps &s_fixed,
                                            const NoiseCovariance &n, const ReconConfig &cfg) {
    cfg.validate();
    const ComplexGrid x0(b.rows(), b.cols(), Domain::image);
    return solve_image_subproblem_traced(b, s_fixed, n, x0, cfg, cfg.baseline_fista_iterations)
        .image;
}

// ---------------------------------------------------------------------------
// Hybrid-domain ingestion of 3D Cartesian data.

/// 3D multi-coil k-space with the readout axis first:
/// value(coil, z, r, c) at data[coil](z, r * cols + c). The mask covers the
/// two phase-encode axes; readout is fully sampled.
struct KSpaceVolume {
    Index readout = 0, rows = 0, cols = 0;
    std::vector<CMat> data; ///< one readout x (rows*cols) matrix per coil
    SamplingMask mask;

    Index coils() const noexcept { return static_cast<Index>(data.size()); }
};

/// Inverse DFT along readout, then one 2D k-space dataset per readout position.
inline std::vector<MultiCoilKSpace> hybrid_ingest(const KSpaceVolume &vol) {
    if (vol.data.empty()) throw DimensionError("hybrid_ingest: no coils");
    if (vol.mask.rows() != vol.rows || vol.mask.cols() != vol.cols)
        throw DimensionError("hybrid_ingest: mask does not match phase-encode dims");
    const Index pixels = vol.rows * vol.cols;
    std::vector<CMat> hybrid;
    for (const auto &coil : vol.data) {
        if (coil.rows() != vol.readout || coil.cols() != pixels)
            throw DimensionError("hybrid_ingest: coil volume has the wrong shape");
        CMat h(vol.readout, pixels);
        for (Index p = 0; p < pixels; ++p) h.col(p) = idft1_centered(coil.col(p));
        hybrid.push_back(std::move(h));
    }
    std::vector<MultiCoilKSpace> slices;
    slices.reserve(static_cast<std::size_t>(vol.readout));
    for (Index z = 0; z < vol.readout; ++z) {
        CMat planes(pixels, vol.coils());
        for (Index c = 0; c < vol.coils(); ++c) planes.col(c) = hybrid[c].row(z).transpose();
        slices.emplace_back(CoilStack(vol.rows, vol.cols, std::move(planes), Domain::kspace),
                            vol.mask, 1.0);
    }
    return slices;
}

} // namespace mccs
