#include "qse/approx.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qse/errors.hpp"

namespace qse {

namespace {

double stable_sum(std::span<const double> values) {
    double sum = 0.0;
    double comp = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

double mean_level(const EnergySpectrum& spectrum) {
    return stable_sum(spectrum.levels()) / static_cast<double>(spectrum.dim());
}

// Constrained mean energy of the surrogate at given z = lambda/mu; strictly
// increasing on both branches.
double energy_at_z(std::span<const double> levels, double z) {
    double num = 0.0;
    double den = 0.0;
    for (double e : levels) {
        const double r = 1.0 / (z + e);
        num += e * r;
        den += r;
    }
    return num / den;
}

// Log-space bisection of a monotone increasing f over [lo, hi], both > 0.
// Returns the geometric midpoint once the bracket is relatively tight.
template <typename F>
double bisect_log(F&& f, double lo, double hi, double target) {
    double flo = f(lo);
    double fhi = f(hi);
    int guard = 0;
    while (flo > target) {
        hi = lo;
        fhi = flo;
        lo *= 0.25;
        flo = f(lo);
        if (++guard > 600 || lo < 1e-300) {
            throw NumericError("bracket expansion failed toward zero");
        }
    }
    guard = 0;
    while (fhi < target) {
        lo = hi;
        flo = fhi;
        hi *= 4.0;
        fhi = f(hi);
        if (++guard > 600 || hi > 1e300) {
            throw NumericError("bracket expansion failed toward infinity");
        }
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-13 * mid) {
            break;
        }
    }
    return std::sqrt(lo * hi);
}

LagrangeSolution from_z(std::span<const double> levels, double z, double energy,
                        EnergyBranch branch) {
    double den = 0.0;
    for (double e : levels) {
        den += 1.0 / (z + e);
    }
    LagrangeSolution s;
    s.mu = den;
    s.lambda = den * z;
    s.branch = branch;
    double c1 = 0.0;
    double c2 = 0.0;
    for (double e : levels) {
        const double r = 1.0 / (s.lambda + s.mu * e);
        c1 += r;
        c2 += e * r;
    }
    s.residual_norm = std::max(std::abs(c1 - 1.0), std::abs(c2 - energy));
    return s;
}

void require_valid_energy(const EnergySpectrum& spectrum, double energy) {
    if (!(energy > 0.0) || !(energy < spectrum.e_max())) {
        throw DomainError("energy must lie strictly between 0 and the top level");
    }
}

} // namespace

std::vector<double> ApproxDistribution::means() const {
    std::vector<double> m(rates.size());
    for (std::size_t k = 0; k < rates.size(); ++k) {
        m[k] = rates[k] > 0.0 ? 1.0 / rates[k] : 0.0;
    }
    if (ground_delta.has_value()) {
        m[0] = *ground_delta;
    }
    return m;
}

LagrangeSolution solve_lagrange(const EnergySpectrum& spectrum, double energy) {
    require_valid_energy(spectrum, energy);
    const auto levels = spectrum.levels();
    const double n = static_cast<double>(spectrum.dim());
    const double e_star = mean_level(spectrum);

    if (std::abs(energy - e_star) <= 1e-12 * std::max(1.0, e_star)) {
        LagrangeSolution s;
        s.lambda = n;
        s.mu = 0.0;
        s.branch = EnergyBranch::AtEstar;
        double c2 = 0.0;
        for (double e : levels) {
            c2 += e / n;
        }
        s.residual_norm = std::abs(c2 - energy);
        return s;
    }

    if (energy < e_star) {
        const double z = bisect_log([&](double zz) { return energy_at_z(levels, zz); },
                                    1e-6, 10.0 * spectrum.e_max(), energy);
        return from_z(levels, z, energy, EnergyBranch::BelowEstar);
    }

    // Above e_star the multiplier ratio sits below -E_N; w = -1/(z + E_N)
    // maps that branch onto (0, inf) with the energy still increasing in w.
    const double e_top = spectrum.e_max();
    const auto energy_at_w = [&](double w) {
        return energy_at_z(levels, -e_top - 1.0 / w);
    };
    const double w = bisect_log(energy_at_w, 1e-12, 1e12, energy);
    return from_z(levels, -e_top - 1.0 / w, energy, EnergyBranch::AboveEstar);
}

ApproxDistribution rpse_approx(std::size_t n_states) {
    if (n_states < 1) {
        throw DomainError("need at least one state");
    }
    ApproxDistribution d;
    d.kind = ApproxKind::Rpse;
    d.rates.assign(n_states, static_cast<double>(n_states));
    return d;
}

ApproxDistribution feee_approx_i(const EnergySpectrum& spectrum, double energy) {
    const LagrangeSolution s = solve_lagrange(spectrum, energy);
    ApproxDistribution d;
    d.kind = ApproxKind::FeeeI;
    d.rates.resize(spectrum.dim());
    for (std::size_t k = 0; k < d.rates.size(); ++k) {
        const double r = s.lambda + s.mu * spectrum.level(k);
        if (!(r > 0.0)) {
            throw NumericError("nonpositive surrogate rate at level " + std::to_string(k + 1));
        }
        d.rates[k] = r;
    }
    return d;
}

ApproxDistribution feee_approx_ii(const EnergySpectrum& spectrum, double energy) {
    if (!(energy > 0.0)) {
        throw DomainError("energy must be positive");
    }
    const SpectrumConstants c = constants(spectrum);
    const double n_minus_1 = static_cast<double>(spectrum.dim() - 1);
    const double delta = 1.0 - energy * c.s0 / n_minus_1;
    if (delta < 0.0) {
        throw RegimeError("energy too high for the low-energy surrogate: "
                          "ground point mass would be negative");
    }
    ApproxDistribution d;
    d.kind = ApproxKind::FeeeII;
    d.ground_delta = delta;
    d.rates.resize(spectrum.dim());
    d.rates[0] = 0.0;
    for (std::size_t k = 1; k < d.rates.size(); ++k) {
        d.rates[k] = n_minus_1 * spectrum.level(k) / energy;
    }
    return d;
}

double mean_entropy_rpse(std::size_t n_states) {
    if (n_states < 1) {
        throw DomainError("need at least one state");
    }
    return std::log(static_cast<double>(n_states)) - (1.0 - kEulerGamma);
}

double mean_entropy_feee_i(const EnergySpectrum& spectrum, double energy) {
    const ApproxDistribution d = feee_approx_i(spectrum, energy);
    double acc = 0.0;
    for (double r : d.rates) {
        acc += std::log(r) / r;
    }
    return acc - (1.0 - kEulerGamma);
}

double mean_entropy_feee_ii(const EnergySpectrum& spectrum, double energy) {
    const ApproxDistribution d = feee_approx_ii(spectrum, energy);
    const std::vector<double> m = d.means();
    double acc = 0.0;
    for (double v : m) {
        if (v > 0.0) {
            acc -= v * std::log(v);
        }
    }
    return acc - (1.0 - kEulerGamma) * (1.0 - *d.ground_delta);
}

double mean_entropy_feee_ii_from_constants(const EnergySpectrum& spectrum, double energy) {
    if (!(energy > 0.0)) {
        throw DomainError("energy must be positive");
    }
    const SpectrumConstants c = constants(spectrum);
    const double e = energy / static_cast<double>(spectrum.dim() - 1);
    const double es0 = e * c.s0;
    if (es0 > 1.0) {
        throw RegimeError("energy too high for the low-energy surrogate");
    }
    const double delta = 1.0 - es0;
    double acc = -es0 * std::log(e) + e * c.f0 - (1.0 - kEulerGamma) * es0;
    if (delta > 0.0) {
        acc -= delta * std::log(delta);
    }
    return acc;
}

double entropy_rel_width_rpse(std::size_t n_states) {
    if (n_states < 2) {
        throw DomainError("need at least two states");
    }
    return 1.0 / std::sqrt(static_cast<double>(n_states));
}

std::pair<double, double> approx_ii_constraint_residuals(const EnergySpectrum& spectrum,
                                                         double energy) {
    const ApproxDistribution d = feee_approx_ii(spectrum, energy);
    const std::vector<double> m = d.means();
    std::vector<double> e_terms(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
        e_terms[k] = m[k] * spectrum.level(k);
    }
    const double c1 = stable_sum(m);
    const double c2 = stable_sum(e_terms);
    return {std::abs(c1 - 1.0), std::abs(c2 - energy)};
}

} // namespace qse
