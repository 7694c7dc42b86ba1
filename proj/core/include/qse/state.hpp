#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qse {

/// Populations of a pure state over an energy eigenbasis: nonnegative,
/// summing to one up to floating round-off.
struct PopulationVector {
    std::vector<double> p;

    std::size_t dim() const noexcept { return p.size(); }
    double operator[](std::size_t k) const { return p[k]; }
};

/// Returns true when every entry lies in [0, 1] and the total is within
/// `tol` of one.
bool is_normalized(const PopulationVector& populations, double tol = 1e-12);

/// Pure state split into populations and phases, c_k = sqrt(P_k) e^{i alpha_k}.
struct PureState {
    PopulationVector populations;
    std::vector<double> phases;

    std::vector<std::complex<double>> amplitudes() const;
};

} // namespace qse
