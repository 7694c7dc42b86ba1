#include "qse/state.hpp"

#include <cmath>

namespace qse {

bool is_normalized(const PopulationVector& populations, double tol) {
    double sum = 0.0;
    for (double v : populations.p) {
        if (!(v >= 0.0) || v > 1.0) {
            return false;
        }
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

std::vector<std::complex<double>> PureState::amplitudes() const {
    std::vector<std::complex<double>> c(populations.dim());
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = std::polar(std::sqrt(populations.p[k]), phases[k]);
    }
    return c;
}

} // namespace qse
