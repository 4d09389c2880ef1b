#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qksub/linalg1.hpp"

namespace qksub {

// Axis-aligned sampling box with optional excluded bands |x_i| < band
// around chart singularities.
struct SampleSpec {
    Vec lo;
    Vec hi;
    std::vector<std::pair<int, double>> min_abs;
};

// Deterministic sampler: mt19937_64 plus explicit bit-to-double scaling, so
// identical seeds give identical points on every platform.
class Sampler {
  public:
    explicit Sampler(uint64_t seed) : rng_(seed) {}

    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double in_range(double lo, double hi) { return lo + (hi - lo) * unit(); }

    Vec point(const SampleSpec& spec);

    // Random direction with components in [-1, 1], renormalized.
    Vec direction(int dim);

    std::vector<Vec> points(const SampleSpec& spec, int count);

  private:
    std::mt19937_64 rng_;
};

}  // namespace qksub
