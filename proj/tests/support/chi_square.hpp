#pragma once

#include <cmath>
#include <span>
#include <vector>

// Pearson chi-square helpers for distribution-agreement tests. All tests in
// this repo run at the 1% significance level so that seeded runs stay far
// from the rejection boundary.

namespace testsupport {

// 99th-percentile chi-square quantiles. Exact table entries for the small
// degrees of freedom used here, Wilson-Hilferty approximation elsewhere
// (relative error < 1e-3 for df >= 10, plenty for a 1% gate).
inline double chi_square_critical_1pct(int df) {
    static constexpr double small_df[] = {6.635, 9.210,  11.345, 13.277,
                                          15.086, 16.812, 18.475, 20.090};
    if (df >= 1 && df <= 8) return small_df[df - 1];
    if (df == 15) return 30.5779;
    const double z99 = 2.3263478740408408;
    const double b = 2.0 / (9.0 * df);
    const double x = 1.0 - b + z99 * std::sqrt(b);
    return df * x * x * x;
}

// Statistic over observed counts vs expected probabilities; cells with zero
// expectation must carry zero counts (checked by the caller).
inline double chi_square_stat(std::span<const long long> counts, std::span<const double> probs,
                              long long n) {
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = probs[i] * static_cast<double>(n);
        if (expected <= 0.0) continue;
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

}  // namespace testsupport
