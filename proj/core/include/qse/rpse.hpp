#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qse/rng.hpp"
#include "qse/state.hpp"

namespace qse {

/// Maps N-1 uniforms from (0, 1] to populations distributed uniformly on the
/// probability simplex (the flat measure induced by a uniform pure state).
///
/// The construction peels the simplex one coordinate at a time:
///   P_1 = 1 - xi_1^{1/(N-1)},  P_J = (1 - xi_J^{1/(N-J)}) prod_{i<J} xi_i^{1/(N-i)},
/// and the last population takes the remaining product, so the total
/// telescopes to one exactly up to round-off.  Draws of exactly zero are
/// remapped to the smallest positive representable value; products switch to
/// log-space accumulation above 2^10 dimensions.
std::vector<double> simplex_from_uniforms(std::span<const double> xi);

/// Uniform populations over `n_states` outcomes, consuming exactly
/// n_states - 1 uniform draws from `rng`.
PopulationVector sample_simplex(std::size_t n_states, RandomStream& rng);

/// Independent phases, uniform on [0, 2*pi).
std::vector<double> sample_phases(std::size_t n_states, RandomStream& rng);

/// Bundles populations and phases; validates matching dimensions.
PureState assemble_state(PopulationVector populations, std::vector<double> phases);

/// Joint density of the first N-1 populations under the uniform ensemble:
/// the constant (N-1)!.  Meant for small-N cross-checks; overflows to
/// infinity above N ~ 171.
double rpse_density(const PopulationVector& populations);

} // namespace qse
