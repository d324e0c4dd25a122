#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "mccs/model.hpp"
#include "mccs/prox.hpp"
#include "mccs/rng.hpp"
#include "mccs/tensor.hpp"
#include "mccs/transforms.hpp"

namespace mccs {

// ---------------------------------------------------------------------------
// Shepp-Logan phantom (modified intensities, peak 1).

struct Ellipse {
    double intensity, a, b, x0, y0, phi_deg;
};

inline const std::array<Ellipse, 10> &shepp_logan_ellipses() {
    static const std::array<Ellipse, 10> e{{
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},
        {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
        {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
        {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},
        {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},
        {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    }};
    return e;
}

inline double shepp_logan_value(double x, double y) {
    double v = 0.0;
    for (const auto &e : shepp_logan_ellipses()) {
        const double phi = e.phi_deg * std::numbers::pi / 180.0;
        const double dx = x - e.x0, dy = y - e.y0;
        const double u = (dx * std::cos(phi) + dy * std::sin(phi)) / e.a;
        const double w = (-dx * std::sin(phi) + dy * std::cos(phi)) / e.b;
        if (u * u + w * w <= 1.0) v += e.intensity;
    }
    return v;
}

/// Phantom on [-1,1]^2 with area-averaged pixels (4x4 subsamples), scaled
/// so the brightest pixel is 1. Row 0 is the top of the image.
inline ComplexGrid shepp_logan_phantom(Index rows, Index cols, int supersample = 4) {
    if (rows < 32 || cols < 32) throw DimensionError("phantom needs at least 32x32 pixels");
    ComplexGrid out(rows, cols, Domain::image);
    const double ss = supersample;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int i = 0; i < supersample; ++i)
                for (int j = 0; j < supersample; ++j) {
                    const double x = (2.0 * (c + (j + 0.5) / ss) - cols) / cols;
                    const double y = -(2.0 * (r + (i + 0.5) / ss) - rows) / rows;
                    acc += shepp_logan_value(x, y);
                }
            out(r, c) = acc / (ss * ss);
        }
    const double peak = out.values().real().maxCoeff();
    out.values() /= peak;
    return out;
}

// ---------------------------------------------------------------------------
// Biot-Savart receive sensitivities for a ring of circular loops.

struct Vec3 {
    double x = 0, y = 0, z = 0;
    Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline constexpr double mu0 = 4e-7 * std::numbers::pi;

/// Circular loop discretized as a closed polygon with vertices on the circle.
struct Loop {
    Vec3 center;
    Vec3 axis_u; ///< unit vector in the loop plane
    Vec3 axis_w; ///< unit vector in the loop plane, orthogonal to axis_u
    double radius = 0.0;
    int segments = 64;
    double current = 1.0;

    Vec3 vertex(int j) const {
        const double a = 2.0 * std::numbers::pi * j / segments;
        return center + axis_u * (radius * std::cos(a)) + axis_w * (radius * std::sin(a));
    }
    double segment_length() const {
        return 2.0 * radius * std::sin(std::numbers::pi / segments);
    }
};

struct FieldSample {
    Vec3 b;
    bool clamped = false; ///< point lay within one segment length of the wire
};

/// B = mu0 I / (4 pi) * sum dl x r / |r|^3, r from segment midpoint to point.
inline FieldSample loop_field(const Loop &loop, const Vec3 &p) {
    FieldSample out;
    const double k = mu0 * loop.current / (4.0 * std::numbers::pi);
    const double floor = loop.segment_length();
    Vec3 prev = loop.vertex(0);
    for (int j = 1; j <= loop.segments; ++j) {
        const Vec3 next = loop.vertex(j % loop.segments);
        const Vec3 dl = next - prev;
        const Vec3 r = p - (prev + next) * 0.5;
        double rn = r.norm();
        if (rn < floor) {
            rn = floor;
            out.clamped = true;
        }
        out.b = out.b + cross(dl, r) * (k / (rn * rn * rn));
        prev = next;
    }
    return out;
}

struct CoilGeometry {
    Index coils = 8;
    double ring_diameter = 0.5; ///< distance between opposite coil centers [m]
    double loop_radius = 0.08;  ///< [m]
    int segments = 64;
    double plane_offset = 0.0; ///< z of the loop centers relative to the slice [m]

    void validate() const {
        if (coils < 1) throw ConfigError("coil count must be >= 1");
        if (!(ring_diameter > 0.0)) throw ConfigError("ring diameter must be positive");
        if (!(loop_radius > 0.0)) throw ConfigError("loop radius must be positive");
        if (segments < 3) throw ConfigError("loops need at least 3 segments");
    }

    /// Loop c sits at angle 2 pi c / C on the ring, facing the ring center.
    Loop loop(Index c) const {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(c) / coils;
        const double R = ring_diameter / 2.0;
        Loop l;
        l.center = {R * std::cos(phi), R * std::sin(phi), plane_offset};
        l.axis_u = {-std::sin(phi), std::cos(phi), 0.0};
        l.axis_w = {0.0, 0.0, 1.0};
        l.radius = loop_radius;
        l.segments = segments;
        return l;
    }
};

struct BiotSavartResult {
    SensitivityMaps maps;
    double normalization = 1.0; ///< divisor applied to the raw field maps
    bool clamped = false;       ///< some pixel touched a wire segment
};

/// Pixel (r, c) sits at x = (c - cols/2) fov/cols, y = (r - rows/2) fov/rows,
/// z = 0. Sensitivity is B_x - i B_y; all coils share one normalization so
/// the overall peak magnitude is 1.
inline BiotSavartResult biot_savart_maps(const CoilGeometry &geom, Index rows, Index cols,
                                         double fov) {
    geom.validate();
    if (!(fov > 0.0)) throw ConfigError("field of view must be positive");
    CMat raw(rows * cols, geom.coils);
    bool clamped = false;
    for (Index k = 0; k < geom.coils; ++k) {
        const Loop loop = geom.loop(k);
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) {
                const Vec3 p{static_cast<double>(c - cols / 2) * fov / static_cast<double>(cols),
                             static_cast<double>(r - rows / 2) * fov / static_cast<double>(rows),
                             0.0};
                const FieldSample f = loop_field(loop, p);
                clamped = clamped || f.clamped;
                raw(r * cols + c, k) = cplx(f.b.x, -f.b.y);
            }
    }
    const double peak = raw.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) throw NumericError("coil field vanishes on the whole grid");
    raw /= peak;
    CVec flat = project_unit_disk(Eigen::Map<const CVec>(raw.data(), raw.size()));
    CMat maps = Eigen::Map<CMat>(flat.data(), rows * cols, geom.coils);
    return {SensitivityMaps(CoilStack(rows, cols, std::move(maps), Domain::image)), peak, clamped};
}

/// Frobenius-closest rank-r version of the concatenated map matrix. If the
/// projection pushes any magnitude above 1 the whole matrix is scaled back
/// so the bound holds without raising the rank.
inline SensitivityMaps couple_maps_rank(const SensitivityMaps &s, Index rank) {
    if (rank < 1 || rank > s.coils())
        throw ConfigError("rank must lie in [1, " + std::to_string(s.coils()) + "]");
    if (rank == s.coils()) return s;
    const ThinSvd svd = thin_svd_gram(s.matrix());
    const CMat vr = svd.v.leftCols(rank);
    CMat low = (s.matrix() * vr) * vr.adjoint();
    const double peak = low.cwiseAbs().maxCoeff();
    if (peak > 1.0) low /= peak;
    return SensitivityMaps(CoilStack(s.rows(), s.cols(), std::move(low), Domain::image));
}

// ---------------------------------------------------------------------------
// Variable-density separable Laplacian sampling.

struct MaskSpec {
    Index rows = 64, cols = 64;
    double fraction = 0.25;
    double stddev = 0.3; ///< per-axis standard deviation in normalized frequency
    std::uint64_t seed = 0;

    void validate() const {
        ComplexGrid::check_dims(rows, cols);
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw ConfigError("mask fraction must lie in (0, 1]");
        if (!(stddev > 0.0)) throw ConfigError("mask stddev must be positive");
    }
};

/// Keep probability per bin: separable Laplace density with scale
/// stddev/sqrt(2), scaled to sum to fraction*rows*cols with entries capped
/// at 1 and the excess redistributed over the uncapped bins.
inline RVec laplacian_density(const MaskSpec &spec) {
    spec.validate();
    const Index n = spec.rows * spec.cols;
    const double scale = spec.stddev / std::numbers::sqrt2;
    RVec d(n);
    for (Index r = 0; r < spec.rows; ++r) {
        const double ky = static_cast<double>(r - spec.rows / 2) / static_cast<double>(spec.rows);
        for (Index c = 0; c < spec.cols; ++c) {
            const double kx =
                static_cast<double>(c - spec.cols / 2) / static_cast<double>(spec.cols);
            d(r * spec.cols + c) = std::exp(-std::abs(kx) / scale) * std::exp(-std::abs(ky) / scale);
        }
    }
    const double target = spec.fraction * static_cast<double>(n);
    std::vector<bool> capped(static_cast<std::size_t>(n), false);
    RVec p(n);
    for (int pass = 0; pass <= n; ++pass) {
        double free_mass = 0.0;
        Index n_capped = 0;
        for (Index i = 0; i < n; ++i) {
            if (capped[i])
                ++n_capped;
            else
                free_mass += d(i);
        }
        const double remaining = target - static_cast<double>(n_capped);
        if (n_capped == n) {
            if (remaining > 1e-9) throw ConfigError("mask fraction infeasible after capping");
            p.setOnes();
            return p;
        }
        const double alpha = remaining / free_mass;
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            if (capped[i]) {
                p(i) = 1.0;
            } else {
                p(i) = alpha * d(i);
                if (p(i) > 1.0) {
                    capped[i] = true;
                    changed = true;
                }
            }
        }
        if (!changed) return p;
    }
    throw NumericError("mask density redistribution did not settle");
}

/// Independent Bernoulli draw per bin from the seeded generator; DC is kept.
inline SamplingMask laplacian_mask(const MaskSpec &spec) {
    const RVec p = laplacian_density(spec);
    Rng rng(spec.seed);
    std::vector<bool> kept(static_cast<std::size_t>(p.size()));
    for (Index i = 0; i < p.size(); ++i) kept[i] = rng.uniform() < p(i);
    return SamplingMask(spec.rows, spec.cols, std::move(kept));
}

// ---------------------------------------------------------------------------
// Multi-coil k-space synthesis.

/// b_c = D F(s_c m) + D eta_c, eta = sigma * L_N z with L_N L_N^* = N scaled
/// to unit mean diagonal, z circular standard normal. sigma makes the
/// average per-coil ratio of rms signal to rms noise equal to `snr`
/// (std::numeric_limits<double>::infinity() disables noise). The result is
/// DC-normalized.
inline MultiCoilKSpace synthesize_kspace(const ComplexGrid &phantom, const SensitivityMaps &s,
                                         const SamplingMask &mask, const CMat &noise_cov,
                                         double snr, std::uint64_t seed) {
    if (phantom.rows() != s.rows() || phantom.cols() != s.cols() ||
        mask.rows() != s.rows() || mask.cols() != s.cols())
        throw DimensionError("phantom, maps, and mask dimensions differ");
    if (noise_cov.rows() != s.coils() || noise_cov.cols() != s.coils())
        throw DimensionError("noise covariance does not match coil count");
    if (!(snr > 0.0)) throw ConfigError("snr must be positive");

    CMat coil_images = s.matrix().array().colwise() * phantom.values().array();
    CMat k = dft2_columns(coil_images, s.rows(), s.cols());

    if (std::isfinite(snr)) {
        const double mean_diag = std::real(noise_cov.trace()) / static_cast<double>(s.coils());
        Eigen::LLT<CMat> llt(noise_cov / mean_diag);
        if (llt.info() != Eigen::Success)
            throw NumericError("noise covariance is not positive definite");
        const CMat ln = llt.matrixL();
        const double signal_rms =
            std::sqrt(k.squaredNorm() / static_cast<double>(k.size()));
        const double sigma = signal_rms / snr;
        Rng rng(seed);
        for (Index i = 0; i < k.rows(); ++i) {
            CVec z = rng.complex_normal_vector(s.coils());
            k.row(i) += sigma * (ln * z).transpose();
        }
    }
    MultiCoilKSpace b(CoilStack(s.rows(), s.cols(), std::move(k), Domain::kspace), mask, 1.0);
    return scale_dc(b);
}

} // namespace mccs
