#include "qse/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qse/errors.hpp"

namespace qse {

double shannon_entropy(std::span<const double> populations) {
    double s = 0.0;
    for (double v : populations) {
        if (v >= 1e-300) {
            s -= v * std::log(v);
        }
    }
    return s > 0.0 ? s : 0.0;
}

double shannon_entropy(const PopulationVector& populations) {
    return shannon_entropy(std::span<const double>(populations.p));
}

void RunningStats::add(double value) {
    ++count;
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
    min = std::min(min, value);
    max = std::max(max, value);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) {
        return;
    }
    if (count == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    const double total = na + nb;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    count += other.count;
    min = std::min(min, other.min);
    max = std::max(max, other.max);
}

double RunningStats::variance() const {
    if (count < 2) {
        throw InsufficientDataError("variance needs at least two observations");
    }
    return m2 / static_cast<double>(count - 1);
}

double RunningStats::std_dev() const {
    return std::sqrt(variance());
}

SummaryStats finalize(const RunningStats& stats) {
    SummaryStats out;
    out.count = stats.count;
    out.mean = stats.mean;
    out.std_dev = stats.std_dev();
    if (stats.mean != 0.0) {
        out.rel_width = out.std_dev / stats.mean;
    }
    return out;
}

Histogram::Histogram(double lo, double hi, int bins) : lo_(lo), hi_(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("histogram range must be finite with lo < hi");
    }
    if (bins < 1) {
        throw DomainError("histogram needs at least one bin");
    }
    counts_.assign(static_cast<std::size_t>(bins), 0);
}

double Histogram::bin_width() const noexcept {
    return (hi_ - lo_) / static_cast<double>(counts_.size());
}

void Histogram::add(double value) {
    if (!(value >= lo_) || !(value <= hi_)) {
        ++out_of_range_;
        return;
    }
    auto k = static_cast<std::size_t>((value - lo_) / bin_width());
    if (k >= counts_.size()) {
        k = counts_.size() - 1; // the upper edge closes the last bin
    }
    ++counts_[k];
    value_stats_.add(value);
}

void Histogram::merge(const Histogram& other) {
    if (other.lo_ != lo_ || other.hi_ != hi_ || other.counts_.size() != counts_.size()) {
        throw DimensionError("histogram layouts differ");
    }
    for (std::size_t k = 0; k < counts_.size(); ++k) {
        counts_[k] += other.counts_[k];
    }
    out_of_range_ += other.out_of_range_;
    value_stats_.merge(other.value_stats_);
}

std::int64_t Histogram::total() const noexcept {
    std::int64_t t = out_of_range_;
    for (std::int64_t c : counts_) {
        t += c;
    }
    return t;
}

std::vector<DensityRow> normalize(const Histogram& histogram) {
    const std::int64_t total = histogram.total();
    const double w = histogram.bin_width();
    const double scale =
        total > 0 ? 1.0 / (static_cast<double>(total) * w) : 0.0;
    std::vector<DensityRow> rows(static_cast<std::size_t>(histogram.bins()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].bin_lo = histogram.lo() + w * static_cast<double>(k);
        rows[k].bin_hi = histogram.lo() + w * static_cast<double>(k + 1);
        rows[k].count = histogram.counts()[k];
        rows[k].density = static_cast<double>(histogram.counts()[k]) * scale;
    }
    if (!rows.empty()) {
        rows.back().bin_hi = histogram.hi();
    }
    return rows;
}

std::vector<double> bin_probabilities(const Histogram& histogram) {
    const std::int64_t total = histogram.total();
    std::vector<double> probs(static_cast<std::size_t>(histogram.bins()), 0.0);
    if (total == 0) {
        return probs;
    }
    for (std::size_t k = 0; k < probs.size(); ++k) {
        probs[k] = static_cast<double>(histogram.counts()[k]) / static_cast<double>(total);
    }
    return probs;
}

GaussianFit gaussian_fit(const Histogram& histogram) {
    int nonempty = 0;
    for (std::int64_t c : histogram.counts()) {
        nonempty += c > 0 ? 1 : 0;
    }
    if (nonempty < 3) {
        throw FitError("need at least three nonempty bins");
    }
    const RunningStats& stats = histogram.value_stats();
    if (stats.count < 2) {
        throw FitError("need at least two in-range values");
    }
    GaussianFit fit;
    fit.mu = stats.mean;
    fit.sigma = stats.std_dev();
    if (!(fit.sigma > 0.0)) {
        throw FitError("degenerate histogram: zero spread");
    }
    return fit;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("probability vectors differ in length");
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc += std::abs(a[k] - b[k]);
    }
    return 0.5 * acc;
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
    out << "bin_lo,bin_hi,count,density\n";
    char buf[128];
    for (const DensityRow& row : normalize(histogram)) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%lld,%.17g\n", row.bin_lo,
                      row.bin_hi, static_cast<long long>(row.count), row.density);
        out << buf;
    }
}

} // namespace qse
