#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mccs/tensor.hpp"

namespace mccs {

/// Proximal oracle signature: prox(v, t) = argmin_u t*g(u) + 1/2 ||u - v||^2.
using ProxOracle = std::function<CVec(const CVec &, double)>;

namespace detail {
inline void require_positive(double t, const char *what) {
    if (!(t > 0.0)) throw ConfigError(std::string(what) + ": step must be positive");
}
} // namespace detail

/// Complex soft threshold: shrink each magnitude by t, keep the phase.
inline CVec prox_l1_complex(const CVec &v, double t) {
    detail::require_positive(t, "prox_l1_complex");
    CVec out(v.size());
    for (Index i = 0; i < v.size(); ++i) {
        const double m = std::abs(v(i));
        out(i) = m > t ? v(i) * ((m - t) / m) : cplx(0.0);
    }
    return out;
}

/// Clamp every entry to the closed unit disk, preserving phase.
inline CVec project_unit_disk(const CVec &s) {
    CVec out = s;
    for (Index i = 0; i < out.size(); ++i) {
        const double m = std::abs(out(i));
        if (m > 1.0) {
            out(i) /= m;
            // rounding can leave |z| one ulp above 1; keep the result a fixed point
            if (std::abs(out(i)) > 1.0) out(i) *= 1.0 - std::numeric_limits<double>::epsilon();
        }
    }
    return out;
}

/// prox of g(u) = 1/2 ||u - c||^2.
inline CVec prox_quadratic_data(const CVec &y, double t, const CVec &c) {
    detail::require_positive(t, "prox_quadratic_data");
    if (y.size() != c.size()) throw DimensionError("prox_quadratic_data: size mismatch");
    return (y + t * c) / (1.0 + t);
}

/// prox of g(u) = (sigma/2) ||u||^2.
inline CVec prox_scaled_sq(const CVec &y, double t, double sigma) {
    detail::require_positive(t, "prox_scaled_sq");
    if (sigma < 0.0) throw ConfigError("prox_scaled_sq: sigma must be nonnegative");
    return y / (1.0 + t * sigma);
}

/// Thin singular-value decomposition of a tall matrix through its C x C Gram
/// matrix. Singular vectors for zero singular values are not formed.
struct ThinSvd {
    RVec singular_values; ///< descending
    CMat v;               ///< right singular vectors, columns match singular_values
};

inline ThinSvd thin_svd_gram(const CMat &m) {
    const CMat gram = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<CMat> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
    const Index c = gram.rows();
    ThinSvd out;
    out.singular_values.resize(c);
    out.v.resize(c, c);
    // Eigen returns ascending eigenvalues.
    for (Index k = 0; k < c; ++k) {
        out.singular_values(k) = std::sqrt(std::max(eig.eigenvalues()(c - 1 - k), 0.0));
        out.v.col(k) = eig.eigenvectors().col(c - 1 - k);
    }
    return out;
}

/// Singular-value soft thresholding U shrink(Sigma, t) V^*, computed as
/// M V diag(shrink(sigma)/sigma) V^* so that U is never formed.
inline CMat prox_nuclear(const CMat &m, double t) {
    detail::require_positive(t, "prox_nuclear");
    if (m.rows() < m.cols()) throw DimensionError("prox_nuclear expects a tall matrix");
    if (!m.allFinite()) throw NumericError("prox_nuclear: non-finite entries");
    const ThinSvd svd = thin_svd_gram(m);
    Index kept = 0;
    while (kept < svd.singular_values.size() && svd.singular_values(kept) > t) ++kept;
    if (kept == 0) return CMat::Zero(m.rows(), m.cols());
    const CMat vk = svd.v.leftCols(kept);
    RVec gain(kept);
    for (Index k = 0; k < kept; ++k)
        gain(k) = (svd.singular_values(k) - t) / svd.singular_values(k);
    return (m * vk) * gain.asDiagonal() * vk.adjoint();
}

/// Nuclear norm from the same Gram route.
inline double nuclear_norm(const CMat &m) { return thin_svd_gram(m).singular_values.sum(); }

/// Moreau identity: prox_{t g*}(y) = y - t prox_{g/t}(y/t).
/// `prox_g(v, s)` must return prox_{s g}(v).
template <class Vec, class Prox>
Vec prox_conjugate(const Prox &prox_g, const Vec &y, double t) {
    detail::require_positive(t, "prox_conjugate");
    return y - t * prox_g(Vec(y / t), 1.0 / t);
}

} // namespace mccs
