#pragma once

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <tuple>

#include <fftw3.h>

#include "mccs/tensor.hpp"

namespace mccs {

namespace detail {

/// FFTW plans keyed by shape and direction. Plans are created with
/// FFTW_ESTIMATE | FFTW_UNALIGNED so results do not depend on timing and
/// any buffer can be passed to fftw_execute_dft. FFTW_ESTIMATE never
/// touches the arrays during planning.
class FftPlanCache {
  public:
    ~FftPlanCache() {
        for (auto &[key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Index n0, Index n1, int sign) {
        const auto key = std::make_tuple(n0, n1, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        auto *scratch = fftw_alloc_complex(static_cast<std::size_t>(n0 * n1));
        fftw_plan p = (n1 == 1)
                          ? fftw_plan_dft_1d(static_cast<int>(n0), scratch, scratch, sign,
                                             FFTW_ESTIMATE | FFTW_UNALIGNED)
                          : fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1),
                                             scratch, scratch, sign,
                                             FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(scratch);
        plans_.emplace(key, p);
        return p;
    }

    static FftPlanCache &instance() {
        thread_local FftPlanCache cache;
        return cache;
    }

  private:
    std::map<std::tuple<Index, Index, int>, fftw_plan> plans_;
};

inline Index wrap(Index i, Index n) {
    const Index m = i % n;
    return m < 0 ? m + n : m;
}

/// Centered, unitary 2D DFT of one row-major plane: shift the centered
/// origin to index 0, transform, shift the zero frequency back to the center.
/// `in` and `out` may alias.
inline void centered_dft_plane(const cplx *in, cplx *out, Index rows, Index cols, int sign) {
    const Index n = rows * cols;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    fftw_plan p = FftPlanCache::instance().get(rows, cols, sign);
    if (rows % 2 == 0 && cols % 2 == 0) {
        // Even sizes: the centering shifts become a (-1)^(r+c) checkerboard on
        // both sides, times the constant (-1)^(rows/2 + cols/2).
        for (Index i = 0; i < n; ++i) {
            const bool odd = ((i / cols) + (i % cols)) & 1;
            out[i] = odd ? -in[i] : in[i];
        }
        auto *io = reinterpret_cast<fftw_complex *>(out);
        fftw_execute_dft(p, io, io);
        const double s0 = ((rows / 2 + cols / 2) & 1) ? -scale : scale;
        for (Index i = 0; i < n; ++i) {
            const bool odd = ((i / cols) + (i % cols)) & 1;
            out[i] *= odd ? -s0 : s0;
        }
        return;
    }
    CVec buf(n);
    const Index cr = rows / 2, cc = cols / 2;
    for (Index r = 0; r < rows; ++r) {
        const Index ur = wrap(r - cr, rows);
        for (Index c = 0; c < cols; ++c) buf(ur * cols + wrap(c - cc, cols)) = in[r * cols + c];
    }
    auto *io = reinterpret_cast<fftw_complex *>(buf.data());
    fftw_execute_dft(p, io, io);
    for (Index r = 0; r < rows; ++r) {
        const Index ur = wrap(r - cr, rows);
        for (Index c = 0; c < cols; ++c)
            out[r * cols + c] = buf(ur * cols + wrap(c - cc, cols)) * scale;
    }
}

} // namespace detail

/// Unitary 2D DFT with the zero frequency at the centered origin.
inline ComplexGrid dft2_centered(const ComplexGrid &x) {
    ComplexGrid out(x.rows(), x.cols(), Domain::kspace);
    detail::centered_dft_plane(x.values().data(), out.values().data(), x.rows(), x.cols(),
                               FFTW_FORWARD);
    return out;
}

inline ComplexGrid idft2_centered(const ComplexGrid &k) {
    ComplexGrid out(k.rows(), k.cols(), Domain::image);
    detail::centered_dft_plane(k.values().data(), out.values().data(), k.rows(), k.cols(),
                               FFTW_BACKWARD);
    return out;
}

/// Column-wise versions for planes stored as matrix columns (CoilStack layout).
inline CMat dft2_columns(const CMat &planes, Index rows, Index cols) {
    CMat out(planes.rows(), planes.cols());
    for (Index c = 0; c < planes.cols(); ++c)
        detail::centered_dft_plane(planes.col(c).data(), out.col(c).data(), rows, cols,
                                   FFTW_FORWARD);
    return out;
}

inline CMat idft2_columns(const CMat &planes, Index rows, Index cols) {
    CMat out(planes.rows(), planes.cols());
    for (Index c = 0; c < planes.cols(); ++c)
        detail::centered_dft_plane(planes.col(c).data(), out.col(c).data(), rows, cols,
                                   FFTW_BACKWARD);
    return out;
}

/// Unitary centered 1D inverse DFT of a single vector.
inline CVec idft1_centered(const CVec &k) {
    const Index n = k.size();
    CVec buf(n), out(n);
    const Index c0 = n / 2;
    for (Index i = 0; i < n; ++i) buf(detail::wrap(i - c0, n)) = k(i);
    auto *io = reinterpret_cast<fftw_complex *>(buf.data());
    fftw_execute_dft(detail::FftPlanCache::instance().get(n, 1, FFTW_BACKWARD), io, io);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < n; ++i) out(i) = buf(detail::wrap(i - c0, n)) * scale;
    return out;
}

// ---------------------------------------------------------------------------
// Daubechies-4 (four-tap) orthonormal wavelet, periodic boundaries.

class WaveletPlan {
  public:
    WaveletPlan(Index rows, Index cols, int levels) : rows_(rows), cols_(cols), levels_(levels) {
        if (levels < 1) throw ConfigError("wavelet levels must be >= 1");
        const Index block = Index{1} << levels;
        if (rows % block != 0 || cols % block != 0)
            throw ConfigError("grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                              " not divisible by 2^" + std::to_string(levels));
    }

    /// Deepest level the dimensions allow, capped at 4.
    static int default_levels(Index rows, Index cols) {
        int l = 0;
        while (l < 4 && rows % (Index{2} << l) == 0 && cols % (Index{2} << l) == 0) ++l;
        if (l == 0) throw ConfigError("grid dimensions must be even for the wavelet transform");
        return l;
    }

    static WaveletPlan for_grid(Index rows, Index cols, int levels = 0) {
        return WaveletPlan(rows, cols, levels > 0 ? levels : default_levels(rows, cols));
    }

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }
    int levels() const noexcept { return levels_; }

  private:
    Index rows_, cols_;
    int levels_;
};

namespace detail {

inline const std::array<double, 4> &d4_lowpass() {
    static const std::array<double, 4> h = [] {
        const double s3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
        return std::array<double, 4>{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d};
    }();
    return h;
}

inline const std::array<double, 4> &d4_highpass() {
    static const std::array<double, 4> g = [] {
        const auto &h = d4_lowpass();
        return std::array<double, 4>{h[3], -h[2], h[1], -h[0]};
    }();
    return g;
}

// One analysis step on n strided samples: approximations land in the first
// half, details in the second.
inline void d4_forward_1d(cplx *x, Index n, Index stride, CVec &tmp) {
    const auto &h = d4_lowpass();
    const auto &g = d4_highpass();
    const Index half = n / 2;
    for (Index i = 0; i < half; ++i) {
        cplx a = 0.0, d = 0.0;
        for (int k = 0; k < 4; ++k) {
            const cplx v = x[wrap(2 * i + k, n) * stride];
            a += h[k] * v;
            d += g[k] * v;
        }
        tmp(i) = a;
        tmp(half + i) = d;
    }
    for (Index i = 0; i < n; ++i) x[i * stride] = tmp(i);
}

inline void d4_inverse_1d(cplx *x, Index n, Index stride, CVec &tmp) {
    const auto &h = d4_lowpass();
    const auto &g = d4_highpass();
    const Index half = n / 2;
    tmp.head(n).setZero();
    for (Index i = 0; i < half; ++i) {
        const cplx a = x[i * stride];
        const cplx d = x[(half + i) * stride];
        for (int k = 0; k < 4; ++k) tmp(wrap(2 * i + k, n)) += h[k] * a + g[k] * d;
    }
    for (Index i = 0; i < n; ++i) x[i * stride] = tmp(i);
}

inline void check_plan(const ComplexGrid &g, const WaveletPlan &plan) {
    if (g.rows() != plan.rows() || g.cols() != plan.cols())
        throw ConfigError("wavelet plan built for " + std::to_string(plan.rows()) + "x" +
                          std::to_string(plan.cols()) + ", grid is " +
                          std::to_string(g.rows()) + "x" + std::to_string(g.cols()));
}

inline void dwt_in_place(cplx *data, Index rows, Index cols, int levels) {
    CVec tmp(std::max(rows, cols));
    Index r = rows, c = cols;
    for (int l = 0; l < levels; ++l) {
        for (Index i = 0; i < r; ++i) d4_forward_1d(data + i * cols, c, 1, tmp);
        for (Index j = 0; j < c; ++j) d4_forward_1d(data + j, r, cols, tmp);
        r /= 2;
        c /= 2;
    }
}

inline void idwt_in_place(cplx *data, Index rows, Index cols, int levels) {
    CVec tmp(std::max(rows, cols));
    for (int l = levels - 1; l >= 0; --l) {
        const Index r = rows >> l, c = cols >> l;
        for (Index j = 0; j < c; ++j) d4_inverse_1d(data + j, r, cols, tmp);
        for (Index i = 0; i < r; ++i) d4_inverse_1d(data + i * cols, c, 1, tmp);
    }
}

} // namespace detail

/// Multilevel separable D4 transform; each level recurses into the LL band
/// stored in the top-left quadrant of the previous level.
inline ComplexGrid dwt2_d4(const ComplexGrid &x, const WaveletPlan &plan) {
    detail::check_plan(x, plan);
    ComplexGrid out(x.rows(), x.cols(), x.values(), Domain::wavelet);
    detail::dwt_in_place(out.values().data(), x.rows(), x.cols(), plan.levels());
    return out;
}

inline ComplexGrid idwt2_d4(const ComplexGrid &w, const WaveletPlan &plan) {
    detail::check_plan(w, plan);
    ComplexGrid out(w.rows(), w.cols(), w.values(), Domain::image);
    detail::idwt_in_place(out.values().data(), w.rows(), w.cols(), plan.levels());
    return out;
}

// ---------------------------------------------------------------------------
// Centered zero padding and cropping.

/// Embed into a factor-times larger zero grid so that centered origins coincide.
inline ComplexGrid zero_pad_embed(const ComplexGrid &x, int factor = 2) {
    if (factor != 2) throw ConfigError("zero_pad_embed only supports factor 2");
    const Index R = 2 * x.rows(), C = 2 * x.cols();
    ComplexGrid out(R, C, x.domain());
    const Index off_r = R / 2 - x.rows() / 2, off_c = C / 2 - x.cols() / 2;
    for (Index r = 0; r < x.rows(); ++r)
        for (Index c = 0; c < x.cols(); ++c) out(r + off_r, c + off_c) = x(r, c);
    return out;
}

inline ComplexGrid crop_center(const ComplexGrid &x, Index rows, Index cols) {
    if (rows > x.rows() || cols > x.cols())
        throw DimensionError("crop target " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " larger than source " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()));
    ComplexGrid out(rows, cols, x.domain());
    const Index off_r = x.rows() / 2 - rows / 2, off_c = x.cols() / 2 - cols / 2;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) out(r, c) = x(r + off_r, c + off_c);
    return out;
}

} // namespace mccs
