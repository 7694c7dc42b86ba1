#include <cstddef>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qse/errors.hpp"

namespace {

void add_spectrum_flags(CLI::App* cmd, qsecli::SpectrumOptions& s) {
    cmd->add_option("--spins", s.spins, "number of spin-1/2 subsystems");
    cmd->add_option("--freq", s.frequencies,
                    "spin frequencies: one shared value or one per spin (default 1)");
    cmd->add_option("--spectrum-file", s.spectrum_file,
                    "load levels from a text file instead of --spins");
    cmd->add_flag("--no-shift-origin", s.no_shift,
                  "reject spectra whose lowest level is nonzero instead of shifting");
    cmd->add_option("--max-spins", s.max_spins,
                    "refuse spin counts above this guard value");
}

void add_sample_flags(CLI::App* cmd, qsecli::SampleOptions& s) {
    cmd->add_option("--samples", s.samples, "number of kept samples")->required();
    cmd->add_option("--bins", s.bins, "histogram bin count");
    cmd->add_option("--range", s.range, "entropy histogram range (lo hi)")->expected(2);
    cmd->add_option("--pop-hist", s.populations,
                    "1-based population indices to histogram");
    cmd->add_option("--seed", s.seed, "random seed; fully determines all outputs");
    cmd->add_option("--chains", s.chains,
                    "independent chains run concurrently (streams seed,0..seed,n-1)");
    cmd->add_option("--out-dir", s.out_dir, "directory for CSV/JSON outputs");
    cmd->add_flag("--write-samples", s.write_samples,
                  "also write every kept population vector to samples.csv");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"samplers and analytic approximations for ensembles of pure "
                 "quantum states"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");
    app.set_config("--config", "", "read options from a key=value file (flags win)");

    qsecli::SpectrumOptions spectrum_options;
    std::string spectrum_out;
    auto* spectrum_cmd =
        app.add_subcommand("spectrum", "print levels and derived constants");
    add_spectrum_flags(spectrum_cmd, spectrum_options);
    spectrum_cmd->add_option("--out", spectrum_out, "also save the levels to this file");

    std::size_t rpse_dim = 0;
    qsecli::SpectrumOptions rpse_spectrum;
    qsecli::SampleOptions rpse_sample;
    auto* rpse_cmd = app.add_subcommand(
        "sample-rpse", "draw uniformly distributed pure states (exact, no chain)");
    rpse_cmd->add_option("--dim", rpse_dim,
                         "number of basis states (alternative to --spins)");
    rpse_cmd->add_option("--spins", rpse_spectrum.spins,
                         "number of spin-1/2 subsystems (dim = 2^spins)");
    rpse_cmd->add_option("--max-spins", rpse_spectrum.max_spins,
                         "refuse spin counts above this guard value");
    add_sample_flags(rpse_cmd, rpse_sample);

    qsecli::SpectrumOptions feee_spectrum;
    qsecli::EnergyOptions feee_energy;
    qsecli::ChainOptions feee_chain;
    qsecli::SampleOptions feee_sample;
    auto* feee_cmd = app.add_subcommand(
        "sample-feee", "Metropolis sampling at fixed expectation energy");
    add_spectrum_flags(feee_cmd, feee_spectrum);
    feee_cmd->add_option("--energy", feee_energy.energy, "total energy");
    feee_cmd->add_option("--eps", feee_energy.eps,
                         "energy per spin (total = eps * spins)");
    feee_cmd->add_option("--burn-in", feee_chain.burn_in,
                         "discarded leading steps (default: 10x free dimensions)");
    feee_cmd->add_option("--thinning", feee_chain.thinning,
                         "keep every n-th state after burn-in");
    feee_cmd->add_option("--proposal-scale", feee_chain.proposal_scale,
                         "initial proposal width multiplier");
    feee_cmd->add_flag("--no-adapt", feee_chain.no_adapt,
                       "freeze the proposal scale during burn-in");
    add_sample_flags(feee_cmd, feee_sample);

    std::size_t approx_dim = 0;
    qsecli::SpectrumOptions approx_spectrum;
    qsecli::EnergyOptions approx_energy;
    std::string approx_out;
    auto* approx_cmd = app.add_subcommand(
        "approx", "analytic predictions (no sampling): multipliers, factorized "
                  "surrogates, mean entropies");
    approx_cmd->add_option("--dim", approx_dim,
                           "uniform-ensemble predictions for this dimension only");
    add_spectrum_flags(approx_cmd, approx_spectrum);
    approx_cmd->add_option("--energy", approx_energy.energy, "total energy");
    approx_cmd->add_option("--eps", approx_energy.eps,
                           "energy per spin (total = eps * spins)");
    approx_cmd->add_option("--out", approx_out, "write the report here instead of stdout");

    std::string validate_level = "quick";
    std::uint64_t validate_seed = 1;
    auto* validate_cmd =
        app.add_subcommand("validate", "run built-in numerical self-checks");
    validate_cmd->add_option("--level", validate_level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));
    validate_cmd->add_option("--seed", validate_seed, "seed for the check inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*spectrum_cmd) {
            return qsecli::cmd_spectrum(spectrum_options, spectrum_out);
        }
        if (*rpse_cmd) {
            return qsecli::cmd_sample_rpse(rpse_dim, rpse_spectrum, rpse_sample);
        }
        if (*feee_cmd) {
            return qsecli::cmd_sample_feee(feee_spectrum, feee_energy, feee_chain,
                                           feee_sample);
        }
        if (*approx_cmd) {
            return qsecli::cmd_approx(approx_dim, approx_spectrum, approx_energy,
                                      approx_out);
        }
        if (*validate_cmd) {
            return qsecli::cmd_validate(validate_level == "full", validate_seed);
        }
    } catch (const qsecli::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qse::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
