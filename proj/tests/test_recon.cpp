#include <gtest/gtest.h>

#include "mccs/mccs.hpp"
#include "oracles.hpp"

using namespace mccs;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Instance {
    ComplexGrid phantom;
    SensitivityMaps maps;
    MultiCoilKSpace b;
};

Instance make_instance(Index n, double fraction, double snr, std::uint64_t seed = 1) {
    Instance in;
    in.phantom = shepp_logan_phantom(n, n);
    in.maps = couple_maps_rank(biot_savart_maps(CoilGeometry{}, n, n, 0.24).maps, 5);
    SamplingMask mask = SamplingMask::full(n, n);
    if (fraction < 1.0) {
        MaskSpec spec;
        spec.rows = spec.cols = n;
        spec.fraction = fraction;
        spec.seed = seed;
        mask = laplacian_mask(spec);
    }
    in.b = synthesize_kspace(in.phantom, in.maps, mask, CMat::Identity(8, 8), snr, seed + 1);
    return in;
}

ReconConfig small_budget() {
    ReconConfig cfg;
    cfg.outer_iterations = 4;
    cfg.pdhg_iterations = 20;
    cfg.fista_iterations = 10;
    return cfg;
}

double correlation(const CVec &a, const CVec &b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

} // namespace

TEST(InitSensitivity, SingleCoilConstantObject) {
    const auto m = ComplexGrid::constant(16, 16, cplx(0.6, 0.8));
    const auto b = synthesize_kspace(m, SensitivityMaps::ones(16, 16, 1), SamplingMask::full(16, 16),
                                     CMat::Identity(1, 1), inf, 0);
    const auto s = init_sensitivity(b);
    for (Index i = 0; i < 256; ++i) EXPECT_NEAR(std::abs(s.matrix()(i, 0)), 1.0, 1e-12);
}

TEST(InitSensitivity, EqualCoilsShareTheRatio) {
    Rng rng(71);
    const CVec plane = rng.complex_normal_vector(256);
    CMat k(256, 2);
    k.col(0) = plane;
    k.col(1) = plane;
    const MultiCoilKSpace b(CoilStack(16, 16, k, Domain::kspace), SamplingMask::full(16, 16));
    const auto s = init_sensitivity(b, 1e3);
    EXPECT_EQ(s.matrix().col(0), s.matrix().col(1));
    // a very wide low-pass filter keeps the ratio itself
    for (Index i = 0; i < 256; ++i) EXPECT_NEAR(std::abs(s.matrix()(i, 0)), 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(InitSensitivity, CorrelatesWithTruth) {
    const auto in = make_instance(64, 1.0, inf);
    const auto s = init_sensitivity(in.b);
    std::vector<Index> support;
    for (Index i = 0; i < in.phantom.size(); ++i)
        if (std::abs(in.phantom.values()(i)) > 0.0) support.push_back(i);
    for (Index c = 0; c < 8; ++c) {
        CVec a(static_cast<Index>(support.size())), t(static_cast<Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) {
            a(static_cast<Index>(j)) = s.matrix()(support[j], c);
            t(static_cast<Index>(j)) = in.maps.matrix()(support[j], c);
        }
        EXPECT_GT(correlation(a, t), 0.9) << "coil " << c;
    }
    EXPECT_LE(s.max_magnitude(), 1.0 + 1e-12);
}

TEST(InitSensitivity, Errors) {
    const MultiCoilKSpace zero(CoilStack(8, 8, CMat::Zero(64, 2), Domain::kspace),
                               SamplingMask::full(8, 8));
    EXPECT_THROW(init_sensitivity(zero), NumericError);
    const auto in = make_instance(32, 1.0, inf);
    EXPECT_THROW(init_sensitivity(in.b, 0.0), ConfigError);
}

TEST(ImageSubproblem, UnregularizedSingleCoilInvertsDft) {
    Rng rng(72);
    const auto truth = oracle::random_grid(16, 16, rng);
    const auto b = synthesize_kspace(truth, SensitivityMaps::ones(16, 16, 1),
                                     SamplingMask::full(16, 16), CMat::Identity(1, 1), inf, 0);
    ReconConfig cfg;
    cfg.lambda_x = 0.0;
    const auto x = solve_image_subproblem(b, SensitivityMaps::ones(16, 16, 1),
                                          NoiseCovariance::identity(1), ComplexGrid(16, 16), cfg);
    const auto ref = idft2_centered(ComplexGrid(16, 16, CVec(b.matrix().col(0)), Domain::kspace));
    EXPECT_LT((x.values() - ref.values()).norm(), 1e-8 * ref.norm());
}

TEST(ImageSubproblem, ZeroDataGivesZero) {
    const MultiCoilKSpace zero(CoilStack(16, 16, CMat::Zero(256, 2), Domain::kspace),
                               SamplingMask::full(16, 16));
    ReconConfig cfg;
    const auto x = solve_image_subproblem(zero, SensitivityMaps::ones(16, 16, 2),
                                          NoiseCovariance::identity(2), ComplexGrid(16, 16), cfg);
    EXPECT_EQ(x.norm(), 0.0);
}

TEST(ImageSubproblem, MatchesLongRunReference) {
    const auto in = make_instance(32, 0.4, inf);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    cfg.fista.tol = 0.0;
    const ComplexGrid x0(32, 32);
    const auto obj = [&](const ComplexGrid &x) { return composite_objective(in.b, n, x, in.maps, cfg); };
    const auto ref = solve_image_subproblem_traced(in.b, in.maps, n, x0, cfg, 3000).image;
    const auto out = solve_image_subproblem_traced(in.b, in.maps, n, x0, cfg, 300).image;
    const double f_ref = obj(ref), f_out = obj(out);
    EXPECT_LE(std::abs(f_out - f_ref), 1e-5 * f_ref);
    EXPECT_LE(f_ref, f_out + 1e-12 * f_ref);
}

TEST(ImageSubproblem, UnregularizedIsLeastSquares) {
    const auto in = make_instance(32, 0.4, 50.0);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    cfg.lambda_x = 0.0;
    cfg.baseline_fista_iterations = 2000;
    const auto x = sparse_sense_reconstruct(in.b, in.maps, n, cfg);
    const CMat r = apply_E_image(x, in.maps, in.b.mask(), n.whitener) - whiten_data(in.b, n.whitener);
    const auto grad = adjoint_E_image(r, in.maps, in.b.mask(), n.whitener);
    const auto g0 = adjoint_E_image(whiten_data(in.b, n.whitener), in.maps, in.b.mask(), n.whitener);
    EXPECT_LT(grad.norm(), 1e-3 * g0.norm());
}

TEST(MapsSubproblem, UnregularizedRecoversDataRatio) {
    const Index n = 16;
    Rng rng(73);
    ComplexGrid x(n, n);
    for (Index i = 0; i < x.size(); ++i) x.values()(i) = (0.7 + 0.3 * rng.uniform()) * std::polar(1.0, rng.uniform());
    const auto truth = biot_savart_maps(CoilGeometry{}, n, n, 0.24).maps;
    const auto b = synthesize_kspace(x, truth, SamplingMask::full(n, n), CMat::Identity(8, 8), inf, 0);
    ReconConfig cfg;
    cfg.lambda_s = cfg.lambda_s_tilde = 0.0;
    cfg.pdhg_iterations = 3000;
    cfg.pdhg.tol = 0.0;
    const auto s0 = SensitivityMaps(CoilStack(n, n, CMat::Zero(n * n, 8), Domain::image));
    const auto s = solve_maps_subproblem(b, x, NoiseCovariance::identity(8), s0, cfg);
    // the data were DC-scaled, so the oracle ratio is coil image over x
    const CMat coil_images = idft2_columns(b.matrix(), n, n);
    const double xmax = x.values().cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Index i = 0; i < n * n; ++i) {
        if (std::abs(x.values()(i)) <= 0.1 * xmax) continue;
        for (Index c = 0; c < 8; ++c)
            worst = std::max(worst, std::abs(s.matrix()(i, c) - coil_images(i, c) / x.values()(i)));
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(MapsSubproblem, ZeroImageShrinksMapsWithinBound) {
    const auto in = make_instance(32, 0.3, 30.0);
    ReconConfig cfg;
    cfg.pdhg_iterations = 40;
    const auto n = NoiseCovariance::identity(8);
    const auto s0 = init_sensitivity(in.b);
    const auto s = solve_maps_subproblem(in.b, ComplexGrid(32, 32), n, s0, cfg);
    EXPECT_LE(s.max_magnitude(), 1.0 + 1e-9);
    const BandwidthOp band(32, 32, cfg.cutoff);
    EXPECT_LT(band.apply(s.matrix()).norm(), band.apply(s0.matrix()).norm());
    EXPECT_LT(s.matrix().norm(), s0.matrix().norm());
}

TEST(Mccs, SingleOuterIterationIsOneSweep) {
    const auto in = make_instance(32, 0.35, 30.0);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg = small_budget();
    cfg.outer_iterations = 1;
    const auto res = mccs_reconstruct(in.b, n, cfg);
    ASSERT_EQ(res.trace.size(), 1u);

    const auto s = solve_maps_subproblem(in.b, ComplexGrid::constant(32, 32, 1.0), n,
                                         init_sensitivity(in.b, cfg.lpf_sigma), cfg);
    const auto x = solve_image_subproblem(in.b, s, n, ComplexGrid::constant(32, 32, 1.0), cfg);
    EXPECT_EQ(res.maps.matrix(), s.matrix());
    EXPECT_EQ(res.image.values(), x.values());
    EXPECT_EQ(res.trace[0], composite_objective(in.b, n, x, s, cfg));
}

TEST(Mccs, DeterministicAndBounded) {
    const auto in = make_instance(32, 0.35, 30.0);
    const auto n = NoiseCovariance::identity(8);
    const ReconConfig cfg = small_budget();
    const auto a = mccs_reconstruct(in.b, n, cfg);
    const auto b = mccs_reconstruct(in.b, n, cfg);
    EXPECT_EQ(a.trace, b.trace);
    EXPECT_EQ(a.image.values(), b.image.values());
    EXPECT_EQ(a.trace.size(), static_cast<std::size_t>(cfg.outer_iterations));
    EXPECT_LE(a.maps.max_magnitude(), 1.0 + 1e-9);
    for (const auto &d : a.details) {
        EXPECT_GE(d.pdhg_iterations, 1);
        EXPECT_GE(d.fista_iterations, 1);
    }
}

TEST(Mccs, DataConsistencyWithoutRegularization) {
    const auto in = make_instance(32, 0.4, inf);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    cfg.lambda_x = cfg.lambda_s = cfg.lambda_s_tilde = 0.0;
    cfg.outer_iterations = 20;
    const auto res = mccs_reconstruct(in.b, n, cfg);
    const CMat lb = whiten_data(in.b, n.whitener);
    const CMat r = apply_E_image(res.image, res.maps, in.b.mask(), n.whitener) - lb;
    EXPECT_LT(r.norm() / lb.norm(), 1e-3);
}

TEST(Mccs, FullySampledBeatsZeroFilled) {
    const auto in = make_instance(32, 1.0, inf);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    cfg.outer_iterations = 10;
    const auto res = mccs_reconstruct(in.b, n, cfg);
    EXPECT_LT(evaluate_images(res.image, in.phantom).mse,
              evaluate_images(zero_filled_sos(in.b), in.phantom).mse);
}

TEST(Mccs, BeatsSparseSenseWithFlatMaps) {
    const auto in = make_instance(32, 0.4, 30.0);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    cfg.outer_iterations = 10;
    const auto mccs = mccs_reconstruct(in.b, n, cfg);
    const auto flat = sparse_sense_reconstruct(in.b, SensitivityMaps::ones(32, 32, 8), n, cfg);
    EXPECT_LT(evaluate_images(mccs.image, in.phantom).mse, evaluate_images(flat, in.phantom).mse);
}

TEST(SparseSense, TrueMapsBeatZeroFilled) {
    const auto in = make_instance(32, 0.4, inf);
    const auto x = sparse_sense_reconstruct(in.b, in.maps, NoiseCovariance::identity(8), ReconConfig{});
    EXPECT_LT(evaluate_images(x, in.phantom).mse, evaluate_images(zero_filled_sos(in.b), in.phantom).mse);
}

TEST(ZeroFilled, FullSamplingIsSosOfCoilImages) {
    const auto in = make_instance(32, 1.0, inf);
    const auto zf = zero_filled_sos(in.b);
    const CMat coil_images = in.maps.matrix().array().colwise() * in.phantom.values().array();
    const RVec sos = coil_images.rowwise().norm() / in.b.dc_scale();
    EXPECT_LT((zf.values().real() - sos).norm(), 1e-8 * sos.norm());
}

TEST(Weights, RelativeWeightsScaleWithData) {
    const auto in = make_instance(32, 0.3, 30.0);
    const auto n = NoiseCovariance::identity(8);
    ReconConfig cfg;
    const double scale = whiten_data(in.b, n.whitener).norm();
    const auto abs = resolve_weights(cfg, in.b, n);
    EXPECT_DOUBLE_EQ(abs.lambda_x, cfg.lambda_x * scale);
    EXPECT_DOUBLE_EQ(abs.lambda_s, cfg.lambda_s * scale);
    EXPECT_DOUBLE_EQ(abs.lambda_s_tilde, cfg.lambda_s_tilde * scale);
    EXPECT_FALSE(abs.relative_weights);
    EXPECT_EQ(resolve_weights(abs, in.b, n).lambda_x, abs.lambda_x);
    const auto x = ComplexGrid::constant(32, 32, 0.5);
    const auto s = init_sensitivity(in.b);
    EXPECT_EQ(composite_objective(in.b, n, x, s, cfg), composite_objective(in.b, n, x, s, abs));
}

TEST(Config, Validation) {
    ReconConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.lambda_x = -1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = ReconConfig{};
    cfg.outer_iterations = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = ReconConfig{};
    cfg.cutoff = 0.7;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Hybrid, ConstantAlongReadoutLandsInCentralSlice) {
    Rng rng(74);
    KSpaceVolume vol;
    vol.readout = 6;
    vol.rows = 4;
    vol.cols = 4;
    vol.mask = SamplingMask::full(4, 4);
    double total = 0.0;
    for (int c = 0; c < 2; ++c) {
        const CVec plane = rng.complex_normal_vector(16);
        CMat coil(6, 16);
        for (Index z = 0; z < 6; ++z) coil.row(z) = plane.transpose();
        total += coil.squaredNorm();
        vol.data.push_back(coil);
    }
    const auto slices = hybrid_ingest(vol);
    ASSERT_EQ(slices.size(), 6u);
    double sum = 0.0;
    for (Index z = 0; z < 6; ++z) {
        const double e = slices[z].matrix().squaredNorm();
        sum += e;
        if (z != 3) EXPECT_LE(e, 1e-10 * total);
    }
    EXPECT_NEAR(sum, total, 1e-12 * total);
}

TEST(Hybrid, SingleSliceAndParseval) {
    Rng rng(75);
    KSpaceVolume one;
    one.readout = 1;
    one.rows = one.cols = 4;
    one.mask = SamplingMask::full(4, 4);
    one.data.push_back(oracle::random_cmat(1, 16, rng));
    const auto s1 = hybrid_ingest(one);
    ASSERT_EQ(s1.size(), 1u);
    EXPECT_LT((s1[0].matrix().col(0).transpose() - one.data[0].row(0)).norm(), 1e-15);

    KSpaceVolume vol;
    vol.readout = 7;
    vol.rows = 4;
    vol.cols = 6;
    vol.mask = SamplingMask::full(4, 6);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        vol.data.push_back(oracle::random_cmat(7, 24, rng));
        total += vol.data.back().squaredNorm();
    }
    double sum = 0.0;
    for (const auto &s : hybrid_ingest(vol)) sum += s.matrix().squaredNorm();
    EXPECT_NEAR(sum, total, 1e-12 * total);

    vol.data[1] = oracle::random_cmat(5, 24, rng);
    EXPECT_THROW(hybrid_ingest(vol), DimensionError);
}
