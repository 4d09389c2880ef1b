#include "qksub/sampling.hpp"

#include <cmath>

namespace qksub {

Vec Sampler::point(const SampleSpec& spec) {
    const int n = static_cast<int>(spec.lo.size());
    Vec p(n);
    for (int i = 0; i < n; ++i) p(i) = in_range(spec.lo(i), spec.hi(i));
    for (const auto& [idx, band] : spec.min_abs) {
        // remap deterministically into +-[band, hi]
        const double u = unit();
        const double sign = u < 0.5 ? -1.0 : 1.0;
        const double t = u < 0.5 ? 2.0 * u : 2.0 * (u - 0.5);
        p(idx) = sign * (band + t * (spec.hi(idx) - band));
    }
    return p;
}

Vec Sampler::direction(int dim) {
    Vec d(dim);
    double norm2 = 0.0;
    do {
        for (int i = 0; i < dim; ++i) d(i) = 2.0 * unit() - 1.0;
        norm2 = d.squaredNorm();
    } while (norm2 < 1e-6);
    return d / std::sqrt(norm2);
}

std::vector<Vec> Sampler::points(const SampleSpec& spec, int count) {
    std::vector<Vec> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(point(spec));
    return out;
}

}  // namespace qksub
