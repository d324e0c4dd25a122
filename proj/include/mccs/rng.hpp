#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "mccs/tensor.hpp"

namespace mccs {

/// Seeded generator with platform-independent draws. std::mt19937_64 output
/// is fixed by the standard; the distributions in <random> are not, so the
/// uniform and normal draws are done by hand.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; both outputs are used.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circular complex normal with E|z|^2 = 1.
    cplx complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    CVec complex_normal_vector(Index n) {
        CVec v(n);
        for (Index i = 0; i < n; ++i) v(i) = complex_normal();
        return v;
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mccs
