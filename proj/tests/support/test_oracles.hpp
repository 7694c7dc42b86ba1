#pragma once

// Brute-force references used only by tests: every value here is computed by
// a route independent of the implementation it checks.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace testsupport {

// Mean energy of the constrained surrogate at multiplier ratio z.
inline double surrogate_energy_at_z(std::span<const double> levels, double z) {
    double num = 0.0;
    double den = 0.0;
    for (double e : levels) {
        num += e / (z + e);
        den += 1.0 / (z + e);
    }
    return num / den;
}

// Finds the multiplier ratio z by a dense multiplicative scan followed by
// plain bisection on the bracketing pair.  Covers both energy branches: below
// the mean level z is scanned directly; above it the scan runs over
// w = -1/(z + E_max).
inline double dense_scan_multiplier_ratio(std::span<const double> levels, double energy) {
    double mean = 0.0;
    for (double e : levels) {
        mean += e;
    }
    mean /= static_cast<double>(levels.size());
    const double e_top = levels.back();

    const bool below = energy < mean;
    const auto value_at = [&](double t) {
        const double z = below ? t : -e_top - 1.0 / t;
        return surrogate_energy_at_z(levels, z);
    };

    const double step = 1.02;
    double lo = 1e-9;
    double hi = lo * step;
    bool bracketed = false;
    for (; hi < 1e12; lo = hi, hi *= step) {
        if ((value_at(lo) - energy) * (value_at(hi) - energy) <= 0.0) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) {
        throw std::runtime_error("dense scan found no bracket");
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((value_at(lo) - energy) * (value_at(mid) - energy) <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-14 * std::abs(mid)) {
            break;
        }
    }
    const double t = 0.5 * (lo + hi);
    return below ? t : -e_top - 1.0 / t;
}

// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
    if (intervals % 2 != 0) {
        ++intervals;
    }
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int k = 1; k < intervals; ++k) {
        acc += f(a + h * k) * (k % 2 == 0 ? 2.0 : 4.0);
    }
    return acc * h / 3.0;
}

// Mean entropy of the second fixed-energy surrogate, re-derived term by term
// from its defining moments: point mass 1 - E*S0/(N-1) on the ground
// variable, exponential means E/((N-1) E_k) elsewhere, and the Euler-gamma
// correction on the exponential block only.
inline double surrogate_ii_entropy_reference(std::span<const double> levels, double energy) {
    const double gamma = 0.57721566490153286061;
    const double n_minus_1 = static_cast<double>(levels.size() - 1);
    double s0 = 0.0;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        s0 += 1.0 / levels[k];
    }
    const double a1 = 1.0 - energy * s0 / n_minus_1;
    double acc = a1 > 0.0 ? -a1 * std::log(a1) : 0.0;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double m = energy / (n_minus_1 * levels[k]);
        acc -= m * std::log(m);
    }
    return acc - (1.0 - gamma) * (1.0 - a1);
}

} // namespace testsupport
