#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qse/spectrum.hpp"

namespace qsecli {

/// Bad flag combinations that CLI parsing alone cannot reject; mapped to the
/// usage exit code.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpectrumOptions {
    int spins = 0;                     ///< 0 means "not given"
    std::vector<double> frequencies;   ///< empty -> all ones; size 1 -> replicated
    std::string spectrum_file;
    bool no_shift = false;
    int max_spins = qse::EnergySpectrum::kDefaultMaxSpins;
};

struct ResolvedSpectrum {
    std::shared_ptr<const qse::EnergySpectrum> spectrum;
    std::string source;
    bool shifted = false;
};

/// Builds the spectrum from --spins/--freq or --spectrum-file.
ResolvedSpectrum resolve_spectrum(const SpectrumOptions& options);

struct SampleOptions {
    std::uint64_t samples = 0;         ///< kept samples, summed over chains
    int bins = 30;
    std::vector<double> range;         ///< entropy histogram [lo, hi]; empty -> auto
    std::vector<std::size_t> populations; ///< 1-based indices to histogram
    std::uint64_t seed = 1;
    int chains = 1;
    std::string out_dir = ".";
    bool write_samples = false;
};

struct EnergyOptions {
    double energy = 0.0;               ///< absolute; 0 means "not given"
    double eps = 0.0;                  ///< per spin; 0 means "not given"
};

struct ChainOptions {
    std::int64_t burn_in = -1;         ///< -1 -> ten steps per free coordinate
    std::uint64_t thinning = 10;
    double proposal_scale = 0.5;
    bool no_adapt = false;
};

int cmd_spectrum(const SpectrumOptions& options, const std::string& out_file);

/// dim == 0 means "derive 2^spins from the spectrum options".
int cmd_sample_rpse(std::size_t dim, const SpectrumOptions& spectrum,
                    const SampleOptions& sample);

int cmd_sample_feee(const SpectrumOptions& spectrum, const EnergyOptions& energy,
                    const ChainOptions& chain, const SampleOptions& sample);

/// dim > 0 -> uniform-ensemble predictions only; otherwise needs spectrum+energy.
int cmd_approx(std::size_t dim, const SpectrumOptions& spectrum,
               const EnergyOptions& energy, const std::string& out_file);

int cmd_validate(bool full, std::uint64_t seed);

} // namespace qsecli
