#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mccs/error.hpp"

namespace mccs {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

enum class Domain { image, kspace, wavelet };

inline const char *to_string(Domain d) {
    switch (d) {
    case Domain::image: return "image";
    case Domain::kspace: return "kspace";
    case Domain::wavelet: return "wavelet";
    }
    return "?";
}

inline Domain domain_from_string(const std::string &s) {
    if (s == "image") return Domain::image;
    if (s == "kspace") return Domain::kspace;
    if (s == "wavelet") return Domain::wavelet;
    throw ConfigError("unknown domain '" + s + "'");
}

/// Real part of the complex inner product <a, b> = sum conj(a_i) b_i.
/// This is the inner product of C^n viewed as R^2n, which is what the
/// solvers need for gradients and adjoint identities.
template <class A, class B>
double real_inner(const Eigen::DenseBase<A> &a, const Eigen::DenseBase<B> &b) {
    return std::real((a.derived().array().conjugate() * b.derived().array()).sum());
}

template <class A, class B>
cplx inner(const Eigen::DenseBase<A> &a, const Eigen::DenseBase<B> &b) {
    return (a.derived().array().conjugate() * b.derived().array()).sum();
}

/// Dense 2D complex plane, row-major. The centered origin is (rows/2, cols/2).
class ComplexGrid {
  public:
    ComplexGrid() = default;
    ComplexGrid(Index rows, Index cols, Domain domain = Domain::image)
        : rows_(rows), cols_(cols), domain_(domain), values_(CVec::Zero(rows * cols)) {
        check_dims(rows, cols);
    }
    ComplexGrid(Index rows, Index cols, CVec values, Domain domain = Domain::image)
        : rows_(rows), cols_(cols), domain_(domain), values_(std::move(values)) {
        check_dims(rows, cols);
        if (values_.size() != rows * cols)
            throw DimensionError("grid values length " + std::to_string(values_.size()) +
                                 " != rows*cols " + std::to_string(rows * cols));
    }

    static ComplexGrid constant(Index rows, Index cols, cplx v, Domain d = Domain::image) {
        return ComplexGrid(rows, cols, CVec::Constant(rows * cols, v), d);
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index size() const noexcept { return rows_ * cols_; }
    Domain domain() const noexcept { return domain_; }
    void set_domain(Domain d) noexcept { domain_ = d; }

    cplx &operator()(Index r, Index c) { return values_(r * cols_ + c); }
    const cplx &operator()(Index r, Index c) const { return values_(r * cols_ + c); }

    CVec &values() noexcept { return values_; }
    const CVec &values() const noexcept { return values_; }

    double norm() const { return values_.norm(); }

    bool same_shape(const ComplexGrid &o) const noexcept {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

    static void check_dims(Index rows, Index cols) {
        if (rows < 2 || cols < 2)
            throw DimensionError("grid dimensions must be at least 2x2, got " +
                                 std::to_string(rows) + "x" + std::to_string(cols));
    }

  private:
    Index rows_ = 0;
    Index cols_ = 0;
    Domain domain_ = Domain::image;
    CVec values_;
};

/// Cartesian k-space sampling pattern. The centered DC bin is always kept.
class SamplingMask {
  public:
    SamplingMask() = default;
    SamplingMask(Index rows, Index cols, std::vector<bool> kept)
        : rows_(rows), cols_(cols), kept_(std::move(kept)) {
        ComplexGrid::check_dims(rows, cols);
        if (static_cast<Index>(kept_.size()) != rows * cols)
            throw DimensionError("mask length does not match dimensions");
        kept_[dc_index()] = true;
    }

    static SamplingMask full(Index rows, Index cols) {
        return SamplingMask(rows, cols, std::vector<bool>(rows * cols, true));
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index size() const noexcept { return rows_ * cols_; }
    Index dc_index() const noexcept { return (rows_ / 2) * cols_ + cols_ / 2; }

    bool operator[](Index i) const { return kept_[i]; }
    bool operator()(Index r, Index c) const { return kept_[r * cols_ + c]; }
    const std::vector<bool> &kept() const noexcept { return kept_; }

    Index count() const {
        Index n = 0;
        for (bool b : kept_) n += b ? 1 : 0;
        return n;
    }
    double fraction() const { return static_cast<double>(count()) / static_cast<double>(size()); }

    bool operator==(const SamplingMask &o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && kept_ == o.kept_;
    }

  private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<bool> kept_;
};

/// C same-shaped planes stored as the columns of an (rows*cols) x C matrix.
/// Each column is one plane in row-major pixel order.
class CoilStack {
  public:
    CoilStack() = default;
    CoilStack(Index rows, Index cols, Index coils, Domain domain = Domain::image)
        : rows_(rows), cols_(cols), domain_(domain), data_(CMat::Zero(rows * cols, coils)) {
        ComplexGrid::check_dims(rows, cols);
        if (coils < 1) throw DimensionError("coil count must be positive");
    }
    CoilStack(Index rows, Index cols, CMat data, Domain domain = Domain::image)
        : rows_(rows), cols_(cols), domain_(domain), data_(std::move(data)) {
        ComplexGrid::check_dims(rows, cols);
        if (data_.rows() != rows * cols || data_.cols() < 1)
            throw DimensionError("coil stack matrix shape does not match grid dimensions");
    }
    explicit CoilStack(const std::vector<ComplexGrid> &grids) {
        if (grids.empty()) throw DimensionError("empty coil list");
        rows_ = grids.front().rows();
        cols_ = grids.front().cols();
        domain_ = grids.front().domain();
        data_.resize(rows_ * cols_, static_cast<Index>(grids.size()));
        for (std::size_t c = 0; c < grids.size(); ++c) {
            if (!grids[c].same_shape(grids.front()))
                throw DimensionError("coil grids differ in shape");
            data_.col(static_cast<Index>(c)) = grids[c].values();
        }
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    Index pixels() const noexcept { return rows_ * cols_; }
    Index coils() const noexcept { return data_.cols(); }
    Domain domain() const noexcept { return domain_; }

    CMat &matrix() noexcept { return data_; }
    const CMat &matrix() const noexcept { return data_; }

    ComplexGrid grid(Index c) const { return ComplexGrid(rows_, cols_, data_.col(c), domain_); }
    std::vector<ComplexGrid> grids() const {
        std::vector<ComplexGrid> out;
        for (Index c = 0; c < coils(); ++c) out.push_back(grid(c));
        return out;
    }

  private:
    Index rows_ = 0;
    Index cols_ = 0;
    Domain domain_ = Domain::image;
    CMat data_;
};

/// Undersampled multi-coil k-space: per-coil planes, the shared mask, and
/// the divisor already applied by DC normalization.
class MultiCoilKSpace {
  public:
    MultiCoilKSpace() = default;
    MultiCoilKSpace(CoilStack data, SamplingMask mask, double dc_scale = 1.0)
        : data_(std::move(data)), mask_(std::move(mask)), dc_scale_(dc_scale) {
        if (data_.rows() != mask_.rows() || data_.cols() != mask_.cols())
            throw DimensionError("k-space and mask dimensions differ");
        if (!(dc_scale_ > 0.0)) throw ConfigError("dc_scale must be positive");
        data_ = CoilStack(data_.rows(), data_.cols(), std::move(data_.matrix()), Domain::kspace);
        apply_mask();
    }

    Index rows() const noexcept { return data_.rows(); }
    Index cols() const noexcept { return data_.cols(); }
    Index coils() const noexcept { return data_.coils(); }
    const CoilStack &data() const noexcept { return data_; }
    const CMat &matrix() const noexcept { return data_.matrix(); }
    const SamplingMask &mask() const noexcept { return mask_; }
    double dc_scale() const noexcept { return dc_scale_; }
    ComplexGrid grid(Index c) const { return data_.grid(c); }

    /// True if every unsampled entry is exactly zero.
    bool masked_zero() const {
        for (Index i = 0; i < mask_.size(); ++i)
            if (!mask_[i] && (data_.matrix().row(i).array() != cplx(0.0)).any()) return false;
        return true;
    }

  private:
    void apply_mask() {
        for (Index i = 0; i < mask_.size(); ++i)
            if (!mask_[i]) data_.matrix().row(i).setZero();
    }

    CoilStack data_;
    SamplingMask mask_;
    double dc_scale_ = 1.0;
};

} // namespace mccs
