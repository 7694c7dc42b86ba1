#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qse/rng.hpp"
#include "qse/spectrum.hpp"
#include "qse/state.hpp"

namespace qse {

/// Free coordinates of a fixed-energy state: the N-2 populations left after
/// the two constraint eliminations.
struct FreePopulations {
    std::vector<double> q;

    std::size_t dim() const noexcept { return q.size(); }
};

/// Fixed expectation-energy ensemble over a spectrum.
///
/// The normalization and energy constraints eliminate two populations: the
/// last level of the top energy and the last level of the next strictly lower
/// energy (so the eliminated pair always has distinct energies, degenerate
/// spectra included).  With a_j = (E_sub - E_j)/(E_top - E_sub) and
/// b = (E - E_sub)/(E_top - E_sub), the eliminated populations are
///   P_top = b + sum_j a_j q_j,   P_sub = (1 - b) - sum_j (1 + a_j) q_j.
class FeeeTarget {
public:
    FeeeTarget(std::shared_ptr<const EnergySpectrum> spectrum, double energy);

    const EnergySpectrum& spectrum() const noexcept { return *spectrum_; }
    std::shared_ptr<const EnergySpectrum> spectrum_ptr() const noexcept { return spectrum_; }
    double energy() const noexcept { return energy_; }

    std::size_t dim() const noexcept { return spectrum_->dim(); }
    std::size_t free_dim() const noexcept { return free_indices_.size(); }

    /// 0-based positions of the eliminated populations in level order.
    std::size_t top_index() const noexcept { return top_index_; }
    std::size_t subtop_index() const noexcept { return subtop_index_; }
    std::span<const std::size_t> free_indices() const noexcept { return free_indices_; }

    std::span<const double> elimination_coefficients() const noexcept { return a_; }
    double offset_coefficient() const noexcept { return b_; }

    /// Level of the j-th free coordinate.
    double free_level(std::size_t j) const { return spectrum_->level(free_indices_[j]); }

private:
    std::shared_ptr<const EnergySpectrum> spectrum_;
    double energy_;
    std::size_t top_index_;
    std::size_t subtop_index_;
    std::vector<std::size_t> free_indices_;
    std::vector<double> a_;
    double b_;
};

/// Full population vector in level order; entries can be negative when the
/// free coordinates are outside the physical domain (a signal, not a fault).
PopulationVector reconstruct(const FreePopulations& free, const FeeeTarget& target);

bool in_domain(const FreePopulations& free, const FeeeTarget& target);

/// Unnormalized ensemble density over the free coordinates,
/// sqrt(sum_j q_j (1+a_j) a_j - b^2 + b); zero outside the domain.  A bracket
/// below -1e-12 at an in-domain point indicates a coefficient inconsistency
/// and throws NumericError.
double feee_density(const FreePopulations& free, const FeeeTarget& target);

/// Random-walk Metropolis state.  The proposal is an independent Gaussian
/// per coordinate with std dev proposal_scale * base_sigma_j, where the base
/// widths are the surrogate mean populations 1/(lambda + mu E_j).
struct ChainState {
    FreePopulations current;
    double density_value = 0.0;
    std::uint64_t step_index = 0;
    std::uint64_t accepted_count = 0;
    double proposal_scale = 0.5;
    std::vector<double> base_sigma;
    std::vector<double> scratch;
};

/// Starts at the surrogate mean populations projected onto the constraint
/// surface; if round-off pushes that point out of the domain, shrinks toward
/// known anchor points by bisection.  Throws InitializationError when the
/// bounded search fails.
ChainState init_chain(const FeeeTarget& target, double proposal_scale = 0.5);

/// Writes a proposal displaced from the current point into `out`.
void propose(const ChainState& state, RandomStream& rng, std::vector<double>& out);

/// One Metropolis step: propose, evaluate, accept with probability
/// min(1, p(Y)/p(X)).  Out-of-domain proposals have zero density and are
/// always rejected.
void mh_step(ChainState& state, const FeeeTarget& target, RandomStream& rng);

struct ChainConfig {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 10;
    double proposal_scale = 0.5;
    /// During burn-in, double/halve the scale on 500-step windows until the
    /// window acceptance rate sits in [0.2, 0.5]; frozen afterwards.
    bool adapt_during_burn_in = true;
};

/// Default burn-in when the caller does not choose one.
std::uint64_t default_burn_in(const FeeeTarget& target);

struct RunSummary {
    std::uint64_t steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thinning = 0;
    std::uint64_t kept = 0;
    std::uint64_t accepted = 0;
    double acceptance_rate = 0.0;
    double initial_proposal_scale = 0.0;
    double final_proposal_scale = 0.0;
};

/// Runs a chain and streams every kept sample (reconstructed to a full
/// population vector) into `sink`.  Emits floor((steps - burn_in)/thinning)
/// samples.
RunSummary run_chain(const FeeeTarget& target, const ChainConfig& config,
                     RandomStream& rng,
                     const std::function<void(const PopulationVector&)>& sink);

/// Convenience wrapper collecting the kept samples; intended for small runs.
std::vector<PopulationVector> collect_chain(const FeeeTarget& target,
                                            const ChainConfig& config,
                                            RandomStream& rng);

} // namespace qse
