#include "qse/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "qse/errors.hpp"

namespace qse {

namespace {

// Neumaier-compensated sum; spectra can hold millions of levels.
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

} // namespace

EnergySpectrum EnergySpectrum::from_levels(std::vector<double> levels,
                                           OriginPolicy policy,
                                           bool* shifted) {
    if (levels.size() < 2) {
        throw DimensionError("spectrum needs at least two levels");
    }
    for (double v : levels) {
        if (!std::isfinite(v)) {
            throw DomainError("spectrum levels must be finite");
        }
    }
    std::stable_sort(levels.begin(), levels.end());
    const double ground = levels.front();
    bool did_shift = false;
    if (ground != 0.0) {
        if (policy == OriginPolicy::Reject) {
            throw DomainError("ground level is not zero and shifting is disabled");
        }
        for (double& v : levels) {
            v -= ground;
        }
        levels.front() = 0.0;
        did_shift = true;
    }
    if (shifted != nullptr) {
        *shifted = did_shift;
    }
    EnergySpectrum s;
    s.levels_ = std::move(levels);
    return s;
}

EnergySpectrum build_spin_spectrum(int n_spins,
                                   std::span<const double> frequencies,
                                   int max_spins) {
    if (n_spins < 1) {
        throw DomainError("spin count must be positive");
    }
    if (n_spins > max_spins) {
        throw CapacityError("spin count exceeds the configured cap of " +
                            std::to_string(max_spins));
    }
    if (!frequencies.empty() && frequencies.size() != static_cast<std::size_t>(n_spins)) {
        throw DimensionError("need one frequency per spin");
    }
    std::vector<double> freq(frequencies.begin(), frequencies.end());
    if (freq.empty()) {
        freq.assign(static_cast<std::size_t>(n_spins), 1.0);
    }
    for (double w : freq) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw DomainError("spin frequencies must be positive and finite");
        }
    }

    // After shifting the all-down level to zero, each level is the sum of the
    // frequencies of the flipped spins.
    const std::size_t n_levels = std::size_t{1} << n_spins;
    std::vector<double> levels(n_levels);
    for (std::size_t mask = 0; mask < n_levels; ++mask) {
        double e = 0.0;
        for (int k = 0; k < n_spins; ++k) {
            if (mask & (std::size_t{1} << k)) {
                e += freq[static_cast<std::size_t>(k)];
            }
        }
        levels[mask] = e;
    }
    std::stable_sort(levels.begin(), levels.end());

    EnergySpectrum s;
    s.levels_ = std::move(levels);
    s.n_spins_ = n_spins;
    s.frequencies_ = std::move(freq);
    return s;
}

SpectrumConstants constants(const EnergySpectrum& spectrum) {
    const auto levels = spectrum.levels();
    std::vector<double> inv(levels.size() - 1);
    std::vector<double> loginv(levels.size() - 1);
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double e = levels[k];
        if (e == 0.0) {
            throw DegenerateSpectrumError(
                "excited level " + std::to_string(k + 1) +
                " is zero; excited-level sums are undefined");
        }
        inv[k - 1] = 1.0 / e;
        loginv[k - 1] = std::log(e) / e;
    }
    SpectrumConstants c;
    c.e_star = stable_sum(levels) / static_cast<double>(levels.size());
    c.e_max = spectrum.e_max();
    c.s0 = stable_sum(inv);
    c.f0 = stable_sum(loginv);
    return c;
}

EnergySpectrum load_spectrum(const std::filesystem::path& path,
                             OriginPolicy policy,
                             bool* shifted) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open spectrum file: " + path.string());
    }
    std::vector<double> levels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream row(line);
        double v = 0.0;
        if (!(row >> v)) {
            throw IoError("bad eigenvalue at " + path.string() + ":" +
                          std::to_string(line_no));
        }
        std::string rest;
        if (row >> rest) {
            throw IoError("trailing content at " + path.string() + ":" +
                          std::to_string(line_no));
        }
        levels.push_back(v);
    }
    return EnergySpectrum::from_levels(std::move(levels), policy, shifted);
}

void save_spectrum(const EnergySpectrum& spectrum, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write spectrum file: " + path.string());
    }
    char buf[40];
    for (double v : spectrum.levels()) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace qse
