#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ehg {

// Deterministic Gaussian stream: std::mt19937_64 (bit-exact by the
// standard) plus an explicit Box-Muller transform, so seeded outputs do
// not depend on the library's std::normal_distribution implementation.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1], u2 in [0,1)
        const double u1 = (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = double(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform in [0,1).
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ehg
