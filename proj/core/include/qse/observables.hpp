#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "qse/state.hpp"

namespace qse {

/// Shannon entropy -sum_k P_k ln P_k in natural log units.  Entries below
/// 1e-300 take the 0 ln 0 = 0 branch; round-off can otherwise drive the sum
/// infinitesimally negative, so the result is clamped at zero.
double shannon_entropy(std::span<const double> populations);
double shannon_entropy(const PopulationVector& populations);

/// Streaming first/second moments plus extrema; mergeable across chains.
struct RunningStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0; ///< sum of squared deviations from the running mean
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double value);
    void merge(const RunningStats& other);

    /// Sample variance (n - 1 convention); throws InsufficientDataError
    /// below two observations.
    double variance() const;
    double std_dev() const;
};

struct SummaryStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    std::optional<double> rel_width; ///< std/mean, absent when the mean is zero
};

SummaryStats finalize(const RunningStats& stats);

/// Fixed-range histogram with left-closed, right-open bins; the last bin also
/// contains the upper edge.  Values outside [lo, hi] land in an out-of-range
/// counter.  In-range values additionally feed a RunningStats for moment fits.
class Histogram {
public:
    Histogram(double lo, double hi, int bins);

    void add(double value);
    void merge(const Histogram& other);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    int bins() const noexcept { return static_cast<int>(counts_.size()); }
    double bin_width() const noexcept;
    std::span<const std::int64_t> counts() const noexcept { return counts_; }
    std::int64_t out_of_range() const noexcept { return out_of_range_; }
    std::int64_t total() const noexcept;
    const RunningStats& value_stats() const noexcept { return value_stats_; }

private:
    double lo_;
    double hi_;
    std::vector<std::int64_t> counts_;
    std::int64_t out_of_range_ = 0;
    RunningStats value_stats_;
};

struct DensityRow {
    double bin_lo = 0.0;
    double bin_hi = 0.0;
    std::int64_t count = 0;
    double density = 0.0; ///< count / (total * bin width)
};

/// Normalized density table; integrates to at most one, with equality when
/// nothing fell out of range.
std::vector<DensityRow> normalize(const Histogram& histogram);

/// Per-bin probabilities count/total (out-of-range mass excluded from the
/// bins but included in the denominator).
std::vector<double> bin_probabilities(const Histogram& histogram);

struct GaussianFit {
    double mu = 0.0;
    double sigma = 0.0;
};

/// Moment-matched Gaussian through the histogram's tracked values.  Requires
/// at least three nonempty bins and a positive spread; throws FitError
/// otherwise.
GaussianFit gaussian_fit(const Histogram& histogram);

/// Half the L1 distance between two probability vectors of equal length.
double total_variation(std::span<const double> a, std::span<const double> b);

/// CSV with header bin_lo,bin_hi,count,density.
void write_histogram_csv(std::ostream& out, const Histogram& histogram);

} // namespace qse
