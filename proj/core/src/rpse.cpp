#include "qse/rpse.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "qse/errors.hpp"

namespace qse {

namespace {

constexpr std::size_t kLogSpaceThreshold = std::size_t{1} << 10;

double clamp_draw(double xi) {
    if (!(xi > 0.0)) {
        return std::numeric_limits<double>::min();
    }
    return xi < 1.0 ? xi : 1.0;
}

// next() yields the J-th uniform draw; results land in p (size n).
template <typename Next>
void fill_simplex(std::vector<double>& p, Next&& next) {
    const std::size_t n = p.size();
    if (n == 1) {
        p[0] = 1.0;
        return;
    }
    if (n <= kLogSpaceThreshold) {
        double tail = 1.0; // prod_{i<J} xi_i^{1/(N-i)}
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double xi = clamp_draw(next());
            const double t = std::pow(xi, 1.0 / static_cast<double>(n - 1 - j));
            p[j] = tail * (1.0 - t);
            tail *= t;
        }
        p[n - 1] = tail;
    } else {
        double log_tail = 0.0;
        double tail = 1.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double xi = clamp_draw(next());
            log_tail += std::log(xi) / static_cast<double>(n - 1 - j);
            const double next_tail = std::exp(log_tail);
            p[j] = std::max(0.0, tail - next_tail);
            tail = next_tail;
        }
        p[n - 1] = tail;
    }
}

} // namespace

std::vector<double> simplex_from_uniforms(std::span<const double> xi) {
    std::vector<double> p(xi.size() + 1);
    std::size_t j = 0;
    fill_simplex(p, [&] { return xi[j++]; });
    return p;
}

PopulationVector sample_simplex(std::size_t n_states, RandomStream& rng) {
    if (n_states == 0) {
        throw DimensionError("need at least one state");
    }
    PopulationVector out;
    out.p.resize(n_states);
    fill_simplex(out.p, [&] { return rng.uniform_open_closed(); });
    return out;
}

std::vector<double> sample_phases(std::size_t n_states, RandomStream& rng) {
    std::vector<double> phases(n_states);
    for (double& a : phases) {
        a = 2.0 * std::numbers::pi * rng.uniform_half_open();
    }
    return phases;
}

PureState assemble_state(PopulationVector populations, std::vector<double> phases) {
    if (populations.dim() != phases.size()) {
        throw DimensionError("population and phase dimensions differ");
    }
    return PureState{std::move(populations), std::move(phases)};
}

double rpse_density(const PopulationVector& populations) {
    if (populations.dim() == 0) {
        throw DimensionError("empty population vector");
    }
    return std::tgamma(static_cast<double>(populations.dim()));
}

} // namespace qse
