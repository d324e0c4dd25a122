#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mccs/tensor.hpp"
#include "mccs/transforms.hpp"

namespace mccs {

// ---------------------------------------------------------------------------
// Coil noise model.

/// Coil noise covariance N and its whitener L with N^{-1} = L L^*.
struct NoiseCovariance {
    CMat covariance;
    CMat whitener;

    Index coils() const noexcept { return covariance.rows(); }

    static NoiseCovariance identity(Index coils) {
        return {CMat::Identity(coils, coils), CMat::Identity(coils, coils)};
    }
};

inline NoiseCovariance cholesky_whitener(const CMat &n, double max_condition = 1e12) {
    if (n.rows() != n.cols() || n.rows() < 1)
        throw DimensionError("noise covariance must be square");
    const double scale = std::max(n.norm(), std::numeric_limits<double>::min());
    if ((n - n.adjoint()).norm() > 1e-12 * scale)
        throw NumericError("noise covariance is not Hermitian");
    const CMat herm = 0.5 * (n + n.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> eig(herm, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) throw NumericError("noise covariance is not positive definite");
    if (hi / lo > max_condition)
        throw NumericError("noise covariance is ill-conditioned (condition estimate " +
                           std::to_string(hi / lo) + ")");
    const CMat inv = herm.llt().solve(CMat::Identity(n.rows(), n.cols()));
    Eigen::LLT<CMat> llt(0.5 * (inv + inv.adjoint()));
    if (llt.info() != Eigen::Success) throw NumericError("Cholesky of inverse covariance failed");
    return {herm, llt.matrixL()};
}

/// Sample covariance of per-coil noise (columns of `samples` are coils),
/// with diagonal loading of 1e-6 * trace / C.
inline CMat estimate_noise_cov(const CMat &samples) {
    const Index n = samples.rows(), c = samples.cols();
    if (c < 1) throw DimensionError("no coils in noise samples");
    if (n < 10 * c)
        throw ConfigError("need at least " + std::to_string(10 * c) +
                          " noise samples per coil, got " + std::to_string(n));
    const Eigen::RowVectorXcd mean = samples.colwise().mean();
    const CMat centered = samples.rowwise() - mean;
    CMat cov = centered.adjoint() * centered / static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.adjoint()).eval();
    const double load = 1e-6 * std::real(cov.trace()) / static_cast<double>(c);
    cov.diagonal().array() += load;
    return cov;
}

// ---------------------------------------------------------------------------
// Sensitivity maps.

class SensitivityMaps {
  public:
    static constexpr double magnitude_tolerance = 1e-9;

    SensitivityMaps() = default;
    explicit SensitivityMaps(CoilStack stack, bool check_bound = true)
        : stack_(std::move(stack)) {
        if (check_bound && max_magnitude() > 1.0 + magnitude_tolerance)
            throw NumericError("sensitivity map magnitude exceeds 1");
    }

    static SensitivityMaps ones(Index rows, Index cols, Index coils) {
        return SensitivityMaps(
            CoilStack(rows, cols, CMat::Constant(rows * cols, coils, cplx(1.0)), Domain::image));
    }

    Index rows() const noexcept { return stack_.rows(); }
    Index cols() const noexcept { return stack_.cols(); }
    Index pixels() const noexcept { return stack_.pixels(); }
    Index coils() const noexcept { return stack_.coils(); }
    const CoilStack &stack() const noexcept { return stack_; }
    /// Concatenated MN x C view.
    const CMat &matrix() const noexcept { return stack_.matrix(); }
    ComplexGrid map(Index c) const { return stack_.grid(c); }

    double max_magnitude() const {
        return stack_.matrix().size() ? stack_.matrix().cwiseAbs().maxCoeff() : 0.0;
    }

  private:
    CoilStack stack_;
};

// ---------------------------------------------------------------------------
// Whitened multi-coil encoding. Coil k-space is an MN x C matrix, one column
// per coil; unsampled rows are zero.

namespace detail {

inline void zero_unsampled(CMat &k, const SamplingMask &mask) {
    for (Index i = 0; i < mask.size(); ++i)
        if (!mask[i]) k.row(i).setZero();
}

// y <- y conj(L): applies L^* across coils at each sample.
inline CMat whiten(const CMat &k, const CMat &whitener) { return k * whitener.conjugate(); }
inline CMat whiten_adjoint(const CMat &k, const CMat &whitener) {
    return k * whitener.transpose();
}

inline void check_encoding_dims(Index pixels, Index coils, const SamplingMask &mask,
                                const CMat &whitener) {
    if (pixels != mask.size()) throw DimensionError("image and mask sizes differ");
    if (whitener.rows() != coils || whitener.cols() != coils)
        throw DimensionError("whitener is " + std::to_string(whitener.rows()) + "x" +
                             std::to_string(whitener.cols()) + ", expected " +
                             std::to_string(coils) + " coils");
}

} // namespace detail

/// E_x x = L^* D F (S x).
inline CMat apply_E_image(const ComplexGrid &x, const SensitivityMaps &s, const SamplingMask &mask,
                          const CMat &whitener) {
    if (x.rows() != s.rows() || x.cols() != s.cols())
        throw DimensionError("image and sensitivity map dimensions differ");
    detail::check_encoding_dims(x.size(), s.coils(), mask, whitener);
    CMat coil_images = s.matrix().array().colwise() * x.values().array();
    CMat k = dft2_columns(coil_images, x.rows(), x.cols());
    detail::zero_unsampled(k, mask);
    return detail::whiten(k, whitener);
}

inline ComplexGrid adjoint_E_image(const CMat &y, const SensitivityMaps &s,
                                   const SamplingMask &mask, const CMat &whitener) {
    if (y.rows() != s.pixels() || y.cols() != s.coils())
        throw DimensionError("coil k-space shape does not match sensitivity maps");
    detail::check_encoding_dims(s.pixels(), s.coils(), mask, whitener);
    CMat k = detail::whiten_adjoint(y, whitener);
    detail::zero_unsampled(k, mask);
    const CMat img = idft2_columns(k, s.rows(), s.cols());
    CVec x = (s.matrix().conjugate().array() * img.array()).rowwise().sum();
    return ComplexGrid(s.rows(), s.cols(), std::move(x), Domain::image);
}

/// E_s s = L^* D F (X s): the same pipeline with the image as the diagonal.
/// `maps` holds s in concatenated MN x C form; no magnitude bound is assumed.
inline CMat apply_E_maps(const CMat &maps, const ComplexGrid &x, const SamplingMask &mask,
                         const CMat &whitener) {
    if (maps.rows() != x.size()) throw DimensionError("maps and image sizes differ");
    detail::check_encoding_dims(x.size(), maps.cols(), mask, whitener);
    CMat coil_images = maps.array().colwise() * x.values().array();
    CMat k = dft2_columns(coil_images, x.rows(), x.cols());
    detail::zero_unsampled(k, mask);
    return detail::whiten(k, whitener);
}

inline CMat adjoint_E_maps(const CMat &y, const ComplexGrid &x, const SamplingMask &mask,
                           const CMat &whitener) {
    if (y.rows() != x.size()) throw DimensionError("coil k-space and image sizes differ");
    detail::check_encoding_dims(x.size(), y.cols(), mask, whitener);
    CMat k = detail::whiten_adjoint(y, whitener);
    detail::zero_unsampled(k, mask);
    CMat img = idft2_columns(k, x.rows(), x.cols());
    return img.array().colwise() * x.values().conjugate().array();
}

/// L^* b for measured data.
inline CMat whiten_data(const MultiCoilKSpace &b, const CMat &whitener) {
    detail::check_encoding_dims(b.rows() * b.cols(), b.coils(), b.mask(), whitener);
    return detail::whiten(b.matrix(), whitener);
}

// ---------------------------------------------------------------------------
// Bandwidth penalty operator D_c F pad on the doubled field of view.

class BandwidthOp {
  public:
    /// rows/cols are the image grid; the operator works on the 2x padded grid.
    BandwidthOp(Index rows, Index cols, double cutoff)
        : rows_(rows), cols_(cols), cutoff_(cutoff), selector_(4 * rows * cols) {
        if (!(cutoff >= 0.0 && cutoff <= 0.5))
            throw ConfigError("bandwidth cutoff must lie in [0, 0.5]");
        const Index pr = padded_rows(), pc = padded_cols();
        for (Index r = 0; r < pr; ++r)
            for (Index c = 0; c < pc; ++c)
                selector_[r * pc + c] = normalized_radius(r, c, pr, pc) > cutoff ? 1.0 : 0.0;
    }

    /// Radial frequency in cycles/sample about the centered origin. Bins
    /// outside the inscribed disk are reported as 0.5 (the Nyquist band).
    static double normalized_radius(Index r, Index c, Index rows, Index cols) {
        const double fy = static_cast<double>(r - rows / 2) / static_cast<double>(rows);
        const double fx = static_cast<double>(c - cols / 2) / static_cast<double>(cols);
        return std::min(std::sqrt(fx * fx + fy * fy), 0.5);
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index padded_rows() const noexcept { return 2 * rows_; }
    Index padded_cols() const noexcept { return 2 * cols_; }
    double cutoff() const noexcept { return cutoff_; }
    const RVec &selector() const noexcept { return selector_; }
    Index active_bins() const { return static_cast<Index>(selector_.sum()); }

    /// maps: MN x C  ->  (4MN) x C high-frequency spectra.
    CMat apply(const CMat &maps) const {
        if (maps.rows() != rows_ * cols_) throw DimensionError("bandwidth op: size mismatch");
        CMat padded = CMat::Zero(4 * rows_ * cols_, maps.cols());
        const Index pc = padded_cols();
        const Index off_r = rows_ - rows_ / 2, off_c = cols_ - cols_ / 2;
        for (Index c = 0; c < maps.cols(); ++c)
            for (Index r = 0; r < rows_; ++r)
                padded.col(c).segment((r + off_r) * pc + off_c, cols_) =
                    maps.col(c).segment(r * cols_, cols_);
        CMat k = dft2_columns(padded, padded_rows(), padded_cols());
        return k.array().colwise() * selector_.array().cast<cplx>();
    }

    CMat adjoint(const CMat &spectra) const {
        if (spectra.rows() != 4 * rows_ * cols_)
            throw DimensionError("bandwidth adjoint: size mismatch");
        CMat k = spectra.array().colwise() * selector_.array().cast<cplx>();
        CMat padded = idft2_columns(k, padded_rows(), padded_cols());
        CMat out(rows_ * cols_, spectra.cols());
        const Index pc = padded_cols();
        const Index off_r = rows_ - rows_ / 2, off_c = cols_ - cols_ / 2;
        for (Index c = 0; c < spectra.cols(); ++c)
            for (Index r = 0; r < rows_; ++r)
                out.col(c).segment(r * cols_, cols_) =
                    padded.col(c).segment((r + off_r) * pc + off_c, cols_);
        return out;
    }

  private:
    Index rows_, cols_;
    double cutoff_;
    RVec selector_;
};

inline CMat apply_bandwidth(const CMat &maps, const BandwidthOp &op) { return op.apply(maps); }

// ---------------------------------------------------------------------------
// Data normalization and coil combination.

/// Divide all coils by max_c |b_c(DC)| so the largest DC magnitude becomes 1.
inline MultiCoilKSpace scale_dc(const MultiCoilKSpace &b) {
    const Index dc = b.mask().dc_index();
    const double divisor = b.matrix().row(dc).cwiseAbs().maxCoeff();
    if (!(divisor > 0.0)) throw NumericError("scale_dc: DC sample is zero in every coil");
    CoilStack scaled(b.rows(), b.cols(), CMat(b.matrix() / divisor), Domain::kspace);
    return MultiCoilKSpace(std::move(scaled), b.mask(), b.dc_scale() * divisor);
}

/// Pixelwise root-sum-of-squares; returned as a real-valued image grid.
inline ComplexGrid sos_combine(const std::vector<ComplexGrid> &coil_images) {
    if (coil_images.empty()) throw DimensionError("sos_combine: no coil images");
    const auto &first = coil_images.front();
    RVec acc = RVec::Zero(first.size());
    for (const auto &img : coil_images) {
        if (!img.same_shape(first)) throw DimensionError("sos_combine: coil shapes differ");
        acc += img.values().cwiseAbs2();
    }
    return ComplexGrid(first.rows(), first.cols(), acc.cwiseSqrt().cast<cplx>(), Domain::image);
}

inline ComplexGrid sos_combine(const CoilStack &coil_images) {
    return sos_combine(coil_images.grids());
}

} // namespace mccs
