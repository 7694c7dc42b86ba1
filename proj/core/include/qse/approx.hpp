#pragma once

#include <cstddef>
#include <utility>
#include <optional>
#include <vector>

#include "qse/spectrum.hpp"

namespace qse {

/// Euler-Mascheroni constant.
inline constexpr double kEulerGamma = 0.57721566490153286061;

enum class EnergyBranch { BelowEstar, AtEstar, AboveEstar };

/// Multipliers of the maximum-entropy surrogate distribution constrained to
/// unit total population and fixed mean energy.
struct LagrangeSolution {
    double lambda;
    double mu;
    double residual_norm; ///< max absolute defect of the two constraints
    EnergyBranch branch;
};

enum class ApproxKind { Rpse, FeeeI, FeeeII };

/// Factorized surrogate-population model: independent exponential variables,
/// one per level, except that the second fixed-energy variant pins the ground
/// variable at a point mass `ground_delta` (its rate entry is zero then).
struct ApproxDistribution {
    ApproxKind kind = ApproxKind::Rpse;
    std::vector<double> rates;
    std::optional<double> ground_delta;

    /// Mean surrogate populations; they sum to one and reproduce the target
    /// energy for the fixed-energy variants.
    std::vector<double> means() const;
};

/// Solves sum_k 1/(lambda + mu E_k) = 1 and sum_k E_k/(lambda + mu E_k) = E.
///
/// Substituting z = lambda/mu reduces the system to one monotone scalar
/// equation, bisected in log space on z in (0, inf) below the equal-population
/// energy e_star and on w = -1/(z + E_N) above it; at e_star the solution is
/// (lambda, mu) = (N, 0) in closed form.  Requires 0 < energy < E_N.
LagrangeSolution solve_lagrange(const EnergySpectrum& spectrum, double energy);

/// Uniform-ensemble surrogate: every rate equals N.
ApproxDistribution rpse_approx(std::size_t n_states);

/// Fixed-energy surrogate with rates lambda + mu E_k.
ApproxDistribution feee_approx_i(const EnergySpectrum& spectrum, double energy);

/// Low-energy fixed-energy surrogate: point mass 1 - E S0 / (N-1) on the
/// ground variable and rates (N-1) E_k / E on the excited ones.  Throws
/// RegimeError when the point mass would be negative.
ApproxDistribution feee_approx_ii(const EnergySpectrum& spectrum, double energy);

/// ln N - (1 - gamma).
double mean_entropy_rpse(std::size_t n_states);

/// sum_k ln(r_k)/r_k - (1 - gamma) with r_k = lambda + mu E_k.  Goes negative
/// at low energies, where the first surrogate breaks down.
double mean_entropy_feee_i(const EnergySpectrum& spectrum, double energy);

/// Mean entropy of the second fixed-energy surrogate, summed term by term
/// over the surrogate means.
double mean_entropy_feee_ii(const EnergySpectrum& spectrum, double energy);

/// Same value through the closed form in the scaled energy e = E/(N-1):
/// -(1-e S0) ln(1-e S0) - e S0 ln e + e F0 - (1-gamma) e S0.
double mean_entropy_feee_ii_from_constants(const EnergySpectrum& spectrum, double energy);

/// Leading-order relative width of the entropy distribution, 1/sqrt(N).
double entropy_rel_width_rpse(std::size_t n_states);

/// Defects of the two normalization/energy conditions when the closed-form
/// low-energy solution (lambda = 0, mu = (N-1)/E, ground point mass) is
/// substituted back into them.
std::pair<double, double> approx_ii_constraint_residuals(const EnergySpectrum& spectrum,
                                                         double energy);

} // namespace qse
