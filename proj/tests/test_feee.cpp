#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "qse/approx.hpp"
#include "qse/errors.hpp"
#include "qse/feee.hpp"
#include "qse/observables.hpp"
#include "qse/oracle.hpp"
#include "qse/rng.hpp"
#include "qse/spectrum.hpp"

using namespace qse;

namespace {

std::shared_ptr<const EnergySpectrum> ladder4() {
    return std::make_shared<EnergySpectrum>(
        EnergySpectrum::from_levels({0.0, 1.0, 1.0, 2.0}));
}

double run_acceptance(const FeeeTarget& target, double scale, int steps,
                      std::uint64_t seed) {
    ChainState state = init_chain(target, scale);
    RandomStream rng(seed);
    for (int k = 0; k < steps; ++k) {
        mh_step(state, target, rng);
    }
    return static_cast<double>(state.accepted_count) / steps;
}

} // namespace

TEST_CASE("elimination structure of a four-level ladder") {
    const FeeeTarget target(ladder4(), 0.6);
    CHECK(target.dim() == 4);
    CHECK(target.free_dim() == 2);
    CHECK(target.top_index() == 3);
    CHECK(target.subtop_index() == 2);
    REQUIRE(target.free_indices().size() == 2);
    CHECK(target.free_indices()[0] == 0);
    CHECK(target.free_indices()[1] == 1);
    CHECK(target.free_level(0) == 0.0);
    CHECK(target.free_level(1) == 1.0);
    CHECK(target.elimination_coefficients()[0] == doctest::Approx(1.0));
    CHECK(target.elimination_coefficients()[1] == doctest::Approx(0.0));
    CHECK(target.offset_coefficient() == doctest::Approx(-0.4));
}

TEST_CASE("degenerate top level shifts the eliminated pair down") {
    const auto spec = std::make_shared<EnergySpectrum>(
        EnergySpectrum::from_levels({0.0, 1.0, 2.0, 2.0}));
    const FeeeTarget target(spec, 1.0);
    CHECK(target.top_index() == 3);
    CHECK(target.subtop_index() == 1);
    CHECK(target.free_indices()[0] == 0);
    CHECK(target.free_indices()[1] == 2);
    CHECK(target.elimination_coefficients()[0] == doctest::Approx(1.0));
    CHECK(target.elimination_coefficients()[1] == doctest::Approx(-1.0));
    CHECK(target.offset_coefficient() == doctest::Approx(0.0));

    const FreePopulations q{{0.3, 0.1}};
    const auto p = reconstruct(q, target);
    CHECK(p.p[0] == doctest::Approx(0.3));
    CHECK(p.p[1] == doctest::Approx(0.4));
    CHECK(p.p[2] == doctest::Approx(0.1));
    CHECK(p.p[3] == doctest::Approx(0.2));
    CHECK(feee_density(q, target) == doctest::Approx(std::sqrt(0.6)).epsilon(1e-14));
}

TEST_CASE("energy window validation") {
    CHECK_THROWS_AS(FeeeTarget(ladder4(), 0.0), DomainError);
    CHECK_THROWS_AS(FeeeTarget(ladder4(), 2.0), DomainError);
    CHECK_THROWS_AS(FeeeTarget(ladder4(), 2.5), DomainError);
    CHECK_THROWS_AS(FeeeTarget(nullptr, 0.5), DimensionError);
}

TEST_CASE("reconstruction restores both constraints exactly") {
    const FeeeTarget target(ladder4(), 0.6);
    const FreePopulations q{{0.45, 0.3}};
    const auto p = reconstruct(q, target);
    CHECK(p.p[0] == doctest::Approx(0.45));
    CHECK(p.p[1] == doctest::Approx(0.3));
    CHECK(p.p[2] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(p.p[3] == doctest::Approx(0.05).epsilon(1e-13));

    double total = 0.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        total += p.p[k];
        energy += p.p[k] * target.spectrum().level(k);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(energy == doctest::Approx(0.6).epsilon(1e-13));
}

TEST_CASE("density value and domain boundary") {
    const FeeeTarget target(ladder4(), 0.6);
    // Interior point: bracket = 2 q_1 + b - b^2 with b = -0.4.
    const FreePopulations inside{{0.45, 0.3}};
    CHECK(in_domain(inside, target));
    CHECK(feee_density(inside, target) == doctest::Approx(std::sqrt(0.34)).epsilon(1e-14));

    const FreePopulations top_negative{{0.2, 0.3}};
    CHECK_FALSE(in_domain(top_negative, target));
    CHECK(feee_density(top_negative, target) == 0.0);

    const FreePopulations coordinate_negative{{-0.1, 0.5}};
    CHECK_FALSE(in_domain(coordinate_negative, target));
    CHECK(feee_density(coordinate_negative, target) == 0.0);

    const FreePopulations subtop_negative{{0.5, 0.9}};
    CHECK_FALSE(in_domain(subtop_negative, target));
    CHECK(feee_density(subtop_negative, target) == 0.0);

    const FreePopulations wrong_size{{0.1, 0.2, 0.3}};
    CHECK_THROWS_AS(feee_density(wrong_size, target), DimensionError);
    CHECK_THROWS_AS(reconstruct(wrong_size, target), DimensionError);
}

TEST_CASE("chain starts at the surrogate means, inside the domain") {
    for (double energy : {0.3, 0.6, 1.0, 1.5, 1.9}) {
        const FeeeTarget target(ladder4(), energy);
        const ChainState state = init_chain(target);
        CHECK(state.density_value > 0.0);
        CHECK(in_domain(state.current, target));
        CHECK(state.density_value ==
              doctest::Approx(feee_density(state.current, target)));
        const auto means = feee_approx_i(target.spectrum(), energy).means();
        for (std::size_t j = 0; j < target.free_dim(); ++j) {
            CHECK(state.base_sigma[j] ==
                  doctest::Approx(means[target.free_indices()[j]]).epsilon(1e-12));
            CHECK(state.current.q[j] == state.base_sigma[j]);
        }
    }
    const auto spec = std::make_shared<EnergySpectrum>(
        build_spin_spectrum(3, std::vector<double>{1.0, 1.3, 1.7}));
    const FeeeTarget target(spec, 1.2);
    CHECK(init_chain(target).density_value > 0.0);
    CHECK_THROWS_AS(init_chain(target, 0.0), DomainError);
}

TEST_CASE("zero proposal width repeats the current point and always accepts") {
    const FeeeTarget target(ladder4(), 0.6);
    ChainState state = init_chain(target, 0.5);
    state.proposal_scale = 0.0;
    const auto start = state.current.q;
    RandomStream rng(5);
    for (int k = 0; k < 100; ++k) {
        mh_step(state, target, rng);
    }
    CHECK(state.accepted_count == 100);
    CHECK(state.step_index == 100);
    CHECK(state.current.q == start);
}

TEST_CASE("absurdly wide proposals always land outside and are rejected") {
    const FeeeTarget target(ladder4(), 0.6);
    ChainState state = init_chain(target, 1e8);
    const auto start = state.current.q;
    RandomStream rng(6);
    for (int k = 0; k < 1000; ++k) {
        mh_step(state, target, rng);
    }
    CHECK(state.accepted_count == 0);
    CHECK(state.current.q == start);
}

TEST_CASE("acceptance rate decreases with the proposal scale") {
    const FeeeTarget target(ladder4(), 0.6);
    const double narrow = run_acceptance(target, 0.1, 6000, 11);
    const double medium = run_acceptance(target, 1.0, 6000, 11);
    const double wide = run_acceptance(target, 8.0, 6000, 11);
    CHECK(narrow > medium);
    CHECK(medium > wide);
    CHECK(narrow > 0.7);
    CHECK(wide < 0.2);
}

TEST_CASE("kept-sample accounting") {
    const FeeeTarget target(ladder4(), 0.6);
    ChainConfig config;
    config.steps = 1000;
    config.burn_in = 200;
    config.thinning = 10;
    RandomStream rng(21);
    std::uint64_t seen = 0;
    const auto summary =
        run_chain(target, config, rng, [&](const PopulationVector&) { ++seen; });
    CHECK(summary.kept == 80);
    CHECK(seen == 80);
    CHECK(summary.steps == 1000);
    CHECK(summary.burn_in == 200);
    CHECK(summary.thinning == 10);
    CHECK(summary.accepted <= summary.steps);
    CHECK(summary.acceptance_rate ==
          doctest::Approx(static_cast<double>(summary.accepted) / 1000.0));
    CHECK(summary.initial_proposal_scale == summary.final_proposal_scale);

    config.thinning = 1;
    RandomStream rng2(21);
    const auto dense = collect_chain(target, config, rng2);
    CHECK(dense.size() == 800);

    config.thinning = 0;
    CHECK_THROWS_AS(collect_chain(target, config, rng2), DomainError);

    config.thinning = 10;
    config.steps = 100;
    config.burn_in = 200;
    RandomStream rng3(21);
    CHECK(collect_chain(target, config, rng3).empty());
}

TEST_CASE("default burn-in scales with the free dimension above a floor") {
    // Small targets get the floor (room for the scale adaptation to settle),
    // large targets get ten steps per free coordinate.
    CHECK(default_burn_in(FeeeTarget(ladder4(), 0.6)) == 10000);
    const auto spec = std::make_shared<EnergySpectrum>(
        build_spin_spectrum(10, std::vector<double>(10, 1.0)));
    CHECK(default_burn_in(FeeeTarget(spec, 2.0)) == 10220);
}

TEST_CASE("every kept sample satisfies both constraints") {
    for (auto [spec, energy] :
         {std::pair{ladder4(), 0.6},
          std::pair{std::make_shared<const EnergySpectrum>(
                        build_spin_spectrum(3, std::vector<double>{1.0, 1.3, 1.7})),
                    1.2}}) {
        const FeeeTarget target(spec, energy);
        ChainConfig config;
        config.steps = 6000;
        config.burn_in = 1000;
        config.thinning = 10;
        RandomStream rng(33);
        std::uint64_t checked = 0;
        run_chain(target, config, rng, [&](const PopulationVector& p) {
            double total = 0.0;
            double e = 0.0;
            for (std::size_t k = 0; k < p.dim(); ++k) {
                CHECK(p.p[k] >= 0.0);
                total += p.p[k];
                e += p.p[k] * spec->level(k);
            }
            CHECK(std::abs(total - 1.0) < 1e-12);
            CHECK(std::abs(e - energy) < 1e-12);
            ++checked;
        });
        CHECK(checked == 500);
    }
}

TEST_CASE("chains are reproducible by seed and diverge by stream") {
    const FeeeTarget target(ladder4(), 0.6);
    ChainConfig config;
    config.steps = 3000;
    config.burn_in = 500;

    RandomStream a(42);
    RandomStream b(42);
    RandomStream c(42, 1);
    const auto run_a = collect_chain(target, config, a);
    const auto run_b = collect_chain(target, config, b);
    const auto run_c = collect_chain(target, config, c);
    REQUIRE(run_a.size() == run_b.size());
    bool identical = true;
    for (std::size_t s = 0; s < run_a.size(); ++s) {
        if (run_a[s].p != run_b[s].p) {
            identical = false;
        }
    }
    CHECK(identical);
    bool diverged = false;
    for (std::size_t s = 0; s < std::min(run_a.size(), run_c.size()); ++s) {
        if (run_a[s].p != run_c[s].p) {
            diverged = true;
        }
    }
    CHECK(diverged);
}

TEST_CASE("burn-in adaptation pushes the scale toward the target window") {
    const FeeeTarget target(ladder4(), 0.6);
    ChainConfig config;
    config.steps = 4100;
    config.burn_in = 4000;
    config.thinning = 10;

    config.proposal_scale = 1e-3;
    RandomStream up(9);
    const auto grew = run_chain(target, config, up, [](const PopulationVector&) {});
    CHECK(grew.final_proposal_scale > grew.initial_proposal_scale);

    config.proposal_scale = 1e3;
    RandomStream down(9);
    const auto shrank = run_chain(target, config, down, [](const PopulationVector&) {});
    CHECK(shrank.final_proposal_scale < shrank.initial_proposal_scale);

    config.adapt_during_burn_in = false;
    config.proposal_scale = 1e-3;
    RandomStream frozen(9);
    const auto fixed = run_chain(target, config, frozen, [](const PopulationVector&) {});
    CHECK(fixed.final_proposal_scale == fixed.initial_proposal_scale);
}

TEST_CASE("at the equal-population energy the marginals approach the uniform ensemble") {
    const auto spec = std::make_shared<EnergySpectrum>(
        build_spin_spectrum(4, std::vector<double>{1.0, 1.0, 1.0, 1.0}));
    const double e_star = constants(*spec).e_star;
    CHECK(e_star == doctest::Approx(2.0));
    const FeeeTarget target(spec, e_star);

    ChainConfig config;
    config.steps = 2010000;
    config.burn_in = 10000;
    config.thinning = 10;

    RandomStream rng(77);
    std::vector<double> marginal;
    marginal.reserve(200000);
    RunningStats entropy;
    run_chain(target, config, rng, [&](const PopulationVector& p) {
        marginal.push_back(p.p[7]);
        entropy.add(shannon_entropy(p));
    });
    REQUIRE(marginal.size() == 200000);

    const std::size_t n = spec->dim();
    const double ks = ks_distance(
        marginal, [&](double p) { return rpse_marginal_cdf(p, n); });
    CHECK(ks < 0.02);
    CHECK(std::abs(entropy.mean - rpse_exact_mean_entropy(n)) < 0.05);
}
