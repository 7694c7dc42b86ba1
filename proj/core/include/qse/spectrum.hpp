#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace qse {

/// Derived quantities of a spectrum that the analytic approximations need.
struct SpectrumConstants {
    double e_star; ///< mean level; the energy at which all populations are equal on average
    double e_max;  ///< top level
    double s0;     ///< sum over excited levels of 1/E_k
    double f0;     ///< sum over excited levels of ln(E_k)/E_k
};

/// What to do with user-supplied levels whose minimum is not zero.
enum class OriginPolicy {
    AutoShift, ///< subtract the ground level, report through the `shifted` flag
    Reject,    ///< fail with DomainError
};

/// Energy levels in units of the reference quantum, sorted ascending with the
/// ground level pinned at zero.  Immutable after construction.
class EnergySpectrum {
public:
    /// Memory cap for spin-system construction (2^n levels).
    static constexpr int kDefaultMaxSpins = 24;

    /// Builds from an arbitrary list of eigenvalues.  Levels are sorted
    /// ascending (stable, so ties keep their enumeration order).  A nonzero
    /// minimum is handled per `policy`; `shifted`, when given, reports
    /// whether a shift happened.  Requires at least two finite levels.
    static EnergySpectrum from_levels(std::vector<double> levels,
                                      OriginPolicy policy = OriginPolicy::AutoShift,
                                      bool* shifted = nullptr);

    std::span<const double> levels() const noexcept { return levels_; }
    std::size_t dim() const noexcept { return levels_.size(); }
    double level(std::size_t k) const { return levels_[k]; } // 0-based
    double e_max() const { return levels_.back(); }

    /// Set only for spectra built by build_spin_spectrum.
    std::optional<int> n_spins() const noexcept { return n_spins_; }
    std::span<const double> frequencies() const noexcept { return frequencies_; }

private:
    EnergySpectrum() = default;

    std::vector<double> levels_;
    std::optional<int> n_spins_;
    std::vector<double> frequencies_;

    friend EnergySpectrum build_spin_spectrum(int n_spins,
                                              std::span<const double> frequencies,
                                              int max_spins);
};

/// Spectrum of `n_spins` non-interacting spin-1/2 systems with the given
/// positive frequencies (in units of the reference frequency).  The 2^n sums
/// over up/down orientations are shifted so the ground level is exactly zero
/// and sorted ascending.  Throws CapacityError when n_spins > max_spins.
EnergySpectrum build_spin_spectrum(int n_spins,
                                   std::span<const double> frequencies,
                                   int max_spins = EnergySpectrum::kDefaultMaxSpins);

/// Derived constants.  Throws DegenerateSpectrumError when any excited level
/// is zero (the excited-level sums are undefined then).
SpectrumConstants constants(const EnergySpectrum& spectrum);

/// Text format: one eigenvalue per line, decimal, ascending.
EnergySpectrum load_spectrum(const std::filesystem::path& path,
                             OriginPolicy policy = OriginPolicy::AutoShift,
                             bool* shifted = nullptr);
void save_spectrum(const EnergySpectrum& spectrum, const std::filesystem::path& path);

} // namespace qse
