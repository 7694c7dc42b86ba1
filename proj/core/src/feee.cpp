#include "qse/feee.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qse/approx.hpp"
#include "qse/errors.hpp"

namespace qse {

namespace {

struct DensityParts {
    double q_sum = 0.0;
    double aq_sum = 0.0;   // sum a_j q_j
    double dot = 0.0;      // sum q_j (1 + a_j) a_j
    bool negative_q = false;
};

DensityParts accumulate_parts(std::span<const double> q, std::span<const double> a) {
    DensityParts parts;
    for (std::size_t j = 0; j < q.size(); ++j) {
        const double x = q[j];
        if (x < 0.0) {
            parts.negative_q = true;
        }
        parts.q_sum += x;
        parts.aq_sum += a[j] * x;
        parts.dot += a[j] * (1.0 + a[j]) * x;
    }
    return parts;
}

void require_free_dim(const FreePopulations& free, const FeeeTarget& target) {
    if (free.dim() != target.free_dim()) {
        throw DimensionError("free-coordinate dimension does not match the target");
    }
}

} // namespace

FeeeTarget::FeeeTarget(std::shared_ptr<const EnergySpectrum> spectrum, double energy)
    : spectrum_(std::move(spectrum)), energy_(energy) {
    if (!spectrum_) {
        throw DimensionError("missing spectrum");
    }
    const std::size_t n = spectrum_->dim();
    const double e_top = spectrum_->e_max();
    if (!(energy_ > 0.0) || !(energy_ < e_top)) {
        throw DomainError("energy must lie strictly between 0 and the top level");
    }

    top_index_ = n - 1;
    std::size_t sub = n - 1;
    while (sub > 0 && spectrum_->level(sub - 1) == e_top) {
        --sub;
    }
    if (sub == 0) {
        throw DegenerateSpectrumError("no level strictly below the top energy");
    }
    subtop_index_ = sub - 1;

    const double e_sub = spectrum_->level(subtop_index_);
    const double gap = e_top - e_sub;
    b_ = (energy_ - e_sub) / gap;

    free_indices_.reserve(n - 2);
    a_.reserve(n - 2);
    for (std::size_t k = 0; k < n; ++k) {
        if (k == top_index_ || k == subtop_index_) {
            continue;
        }
        free_indices_.push_back(k);
        a_.push_back((e_sub - spectrum_->level(k)) / gap);
    }
}

PopulationVector reconstruct(const FreePopulations& free, const FeeeTarget& target) {
    require_free_dim(free, target);
    const auto parts = accumulate_parts(free.q, target.elimination_coefficients());
    const double b = target.offset_coefficient();

    PopulationVector out;
    out.p.resize(target.dim());
    const auto idx = target.free_indices();
    for (std::size_t j = 0; j < idx.size(); ++j) {
        out.p[idx[j]] = free.q[j];
    }
    out.p[target.top_index()] = b + parts.aq_sum;
    out.p[target.subtop_index()] = (1.0 - b) - (parts.q_sum + parts.aq_sum);
    return out;
}

bool in_domain(const FreePopulations& free, const FeeeTarget& target) {
    require_free_dim(free, target);
    const auto parts = accumulate_parts(free.q, target.elimination_coefficients());
    if (parts.negative_q) {
        return false;
    }
    const double b = target.offset_coefficient();
    return b + parts.aq_sum >= 0.0 &&
           (1.0 - b) - (parts.q_sum + parts.aq_sum) >= 0.0;
}

double feee_density(const FreePopulations& free, const FeeeTarget& target) {
    require_free_dim(free, target);
    const auto parts = accumulate_parts(free.q, target.elimination_coefficients());
    const double b = target.offset_coefficient();
    if (parts.negative_q || b + parts.aq_sum < 0.0 ||
        (1.0 - b) - (parts.q_sum + parts.aq_sum) < 0.0) {
        return 0.0;
    }
    const double bracket = parts.dot + b - b * b;
    if (bracket < 0.0) {
        if (bracket < -1e-12) {
            throw NumericError("squared density negative at an in-domain point");
        }
        return 0.0;
    }
    return std::sqrt(bracket);
}

ChainState init_chain(const FeeeTarget& target, double proposal_scale) {
    if (!(proposal_scale > 0.0)) {
        throw DomainError("proposal scale must be positive");
    }
    const LagrangeSolution mult = solve_lagrange(target.spectrum(), target.energy());

    ChainState state;
    state.proposal_scale = proposal_scale;
    state.base_sigma.resize(target.free_dim());
    state.current.q.resize(target.free_dim());
    state.scratch.resize(target.free_dim());
    for (std::size_t j = 0; j < target.free_dim(); ++j) {
        const double mean = 1.0 / (mult.lambda + mult.mu * target.free_level(j));
        state.base_sigma[j] = mean;
        state.current.q[j] = mean;
    }

    state.density_value = feee_density(state.current, target);
    if (state.density_value > 0.0) {
        return state;
    }

    // The surrogate mean point is interior in exact arithmetic; this fallback
    // only has to absorb round-off.  Shrink toward anchors that the
    // constraints favor: the ground/top two-level mixture, then the origin.
    std::vector<FreePopulations> anchors;
    const auto idx = target.free_indices();
    if (!idx.empty() && idx[0] == 0) {
        FreePopulations two_level;
        two_level.q.assign(target.free_dim(), 0.0);
        two_level.q[0] = 1.0 - target.energy() / target.spectrum().e_max();
        anchors.push_back(std::move(two_level));
    }
    FreePopulations origin;
    origin.q.assign(target.free_dim(), 0.0);
    anchors.push_back(std::move(origin));

    FreePopulations candidate;
    candidate.q.resize(target.free_dim());
    for (const auto& anchor : anchors) {
        double t = 1.0;
        for (int it = 0; it < 70; ++it) {
            t *= 0.5;
            for (std::size_t j = 0; j < candidate.q.size(); ++j) {
                candidate.q[j] = anchor.q[j] + t * (state.current.q[j] - anchor.q[j]);
            }
            const double d = feee_density(candidate, target);
            if (d > 0.0) {
                state.current = candidate;
                state.density_value = d;
                return state;
            }
        }
    }
    throw InitializationError("no in-domain starting point found");
}

void propose(const ChainState& state, RandomStream& rng, std::vector<double>& out) {
    out.resize(state.current.q.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = state.current.q[j] +
                 state.proposal_scale * state.base_sigma[j] * rng.normal();
    }
}

void mh_step(ChainState& state, const FeeeTarget& target, RandomStream& rng) {
    propose(state, rng, state.scratch);
    FreePopulations candidate;
    candidate.q = std::move(state.scratch);
    const double proposed = feee_density(candidate, target);
    const double u = rng.uniform_half_open();
    ++state.step_index;
    if (u * state.density_value < proposed) {
        std::swap(state.current.q, candidate.q);
        state.density_value = proposed;
        ++state.accepted_count;
    }
    state.scratch = std::move(candidate.q);
}

std::uint64_t default_burn_in(const FeeeTarget& target) {
    // 10 steps per free coordinate, but never fewer than twenty adaptation
    // windows: the proposal scale may need a dozen halvings before the
    // acceptance rate reaches its target band.
    return std::max<std::uint64_t>(10 * static_cast<std::uint64_t>(target.free_dim()),
                                   10000);
}

RunSummary run_chain(const FeeeTarget& target, const ChainConfig& config,
                     RandomStream& rng,
                     const std::function<void(const PopulationVector&)>& sink) {
    if (config.thinning < 1) {
        throw DomainError("thinning must be at least 1");
    }
    ChainState state = init_chain(target, config.proposal_scale);

    constexpr std::uint64_t kWindow = 500;
    std::uint64_t window_start_accepts = 0;

    RunSummary summary;
    summary.steps = config.steps;
    summary.burn_in = config.burn_in;
    summary.thinning = config.thinning;
    summary.initial_proposal_scale = config.proposal_scale;

    for (std::uint64_t step = 1; step <= config.steps; ++step) {
        mh_step(state, target, rng);
        if (step <= config.burn_in) {
            if (config.adapt_during_burn_in && step % kWindow == 0) {
                const double rate =
                    static_cast<double>(state.accepted_count - window_start_accepts) /
                    static_cast<double>(kWindow);
                if (rate < 0.2) {
                    state.proposal_scale *= 0.5;
                } else if (rate > 0.5) {
                    state.proposal_scale *= 2.0;
                }
                window_start_accepts = state.accepted_count;
            }
        } else if ((step - config.burn_in) % config.thinning == 0) {
            sink(reconstruct(state.current, target));
            ++summary.kept;
        }
    }

    summary.accepted = state.accepted_count;
    summary.acceptance_rate =
        config.steps > 0
            ? static_cast<double>(state.accepted_count) / static_cast<double>(config.steps)
            : 0.0;
    summary.final_proposal_scale = state.proposal_scale;
    return summary;
}

std::vector<PopulationVector> collect_chain(const FeeeTarget& target,
                                            const ChainConfig& config,
                                            RandomStream& rng) {
    std::vector<PopulationVector> out;
    run_chain(target, config, rng,
              [&](const PopulationVector& sample) { out.push_back(sample); });
    return out;
}

} // namespace qse
