#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's evaluators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

/// 99% critical value of the KS statistic (asymptotic).
inline double ks_critical_99(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

/// Standard normal CDF through std::erf, written out independently of the library.
inline double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

/// Adaptive Simpson integration.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13, int depth = 40) {
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
            const double mid = 0.5 * (lo + hi);
            const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
            const double flm = f(lm), frm = f(rm);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
            if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Monte Carlo mean and standard error of an indicator/statistic over iid draws.
struct McResult {
    double mean;
    double se;
};

inline McResult monte_carlo(std::size_t n, std::uint64_t seed, const std::function<double(std::mt19937_64&)>& draw) {
    std::mt19937_64 rng(seed);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = draw(rng);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = (sum2 - n * mean * mean) / (n - 1);
    return {mean, std::sqrt(std::max(0.0, var) / n)};
}

}  // namespace oracle
