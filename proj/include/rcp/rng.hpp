// Seeded random number generation with portable double output.
#pragma once

#include <cstdint>
#include <random>

namespace rcp {

// mt19937_64 wrapper producing identical streams on every platform.
// std::uniform_real_distribution is implementation-defined, so doubles are
// derived from the raw 64-bit words directly.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0, 1)
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    // uniform on [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer on {lo, ..., hi}
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + std::int64_t(engine_() % std::uint64_t(hi - lo + 1));
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace rcp
