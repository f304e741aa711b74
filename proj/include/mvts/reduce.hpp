#ifndef MVTS_REDUCE_HPP
#define MVTS_REDUCE_HPP

#include <cstddef>
#include <span>

namespace mvts {

/// Pairwise sum over a fixed-order buffer. The reduction tree depends only on
/// the element order, so results are identical no matter how many threads
/// produced the buffer. Also much more accurate than naive left-to-right.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = v[0];
        for (std::size_t i = 1; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace mvts

#endif
