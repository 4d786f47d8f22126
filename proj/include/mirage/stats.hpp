#ifndef MIRAGE_STATS_HPP
#define MIRAGE_STATS_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "mirage/error.hpp"

namespace mirage {

/// Order statistic at percentile p (0..100) with linear interpolation between
/// the closest ranks (the "type 7" convention). `sorted` must be ascending.
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) fail("AllInvalid", "percentile of empty set");
    if (sorted.size() == 1) return sorted[0];
    double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    pos = std::clamp(pos, 0.0, static_cast<double>(sorted.size() - 1));
    std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

/// Same convention without pre-sorting, via partial selection.
inline double percentile_select(std::vector<double> values, double p) {
    if (values.empty()) fail("AllInvalid", "percentile of empty set");
    if (values.size() == 1) return values[0];
    double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    pos = std::clamp(pos, 0.0, static_cast<double>(values.size() - 1));
    std::size_t i = static_cast<std::size_t>(pos);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(i), values.end());
    double lo = values[i];
    if (i + 1 >= values.size()) return lo;
    double hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(i) + 1, values.end());
    double frac = pos - static_cast<double>(i);
    return lo + frac * (hi - lo);
}

inline double mean(const std::vector<double>& v) {
    if (v.empty()) fail("AllInvalid", "mean of empty set");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace mirage

#endif
