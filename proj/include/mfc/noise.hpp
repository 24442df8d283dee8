#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mfc {

struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Gaussian white noise: std::mt19937_64 (fully specified by the standard, so
// the raw stream is identical on every platform) feeding a hand-written
// Box-Muller transform. std::normal_distribution is avoided because its
// algorithm is implementation-defined.
class GaussianNoise {
public:
    explicit GaussianNoise(const NoiseModel& model) : sigma_(model.sigma), engine_(model.seed) {}

    double next() {
        if (sigma_ == 0.0)
            return 0.0;
        if (has_spare_) {
            has_spare_ = false;
            return sigma_ * spare_;
        }
        // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
        const double u1 = 1.0 - static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return sigma_ * radius * std::cos(angle);
    }

private:
    double sigma_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mfc
