#pragma once

#include <cmath>
#include <limits>

#include "mccs/tensor.hpp"

namespace mccs {

struct ImageMetrics {
    double mse = 0.0;       ///< magnitude MSE after the best complex scalar fit
    double mse_unfit = 0.0; ///< magnitude MSE without fitting
    double psnr_db = 0.0;   ///< peak |reference|^2 over fitted MSE, in dB
    cplx scale{1.0, 0.0};   ///< fitted alpha
};

/// alpha = argmin ||alpha recon - reference||_2 over complex alpha; errors
/// are then measured between |alpha recon| and |reference|.
inline ImageMetrics evaluate_images(const ComplexGrid &recon, const ComplexGrid &reference) {
    if (!recon.same_shape(reference))
        throw DimensionError("evaluate: recon is " + std::to_string(recon.rows()) + "x" +
                             std::to_string(recon.cols()) + ", reference is " +
                             std::to_string(reference.rows()) + "x" +
                             std::to_string(reference.cols()));
    ImageMetrics m;
    const double energy = recon.values().squaredNorm();
    m.scale = energy > 0 ? inner(recon.values(), reference.values()) / energy : cplx(0.0);
    const RVec ref_mag = reference.values().cwiseAbs();
    const double n = static_cast<double>(recon.size());
    m.mse = ((m.scale * recon.values()).cwiseAbs() - ref_mag).squaredNorm() / n;
    m.mse_unfit = (recon.values().cwiseAbs() - ref_mag).squaredNorm() / n;
    const double peak = ref_mag.maxCoeff();
    m.psnr_db = m.mse > 0 ? 10.0 * std::log10(peak * peak / m.mse)
                          : std::numeric_limits<double>::infinity();
    return m;
}

} // namespace mccs
