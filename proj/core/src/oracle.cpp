#include "qse/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "qse/errors.hpp"

namespace qse {

namespace {

struct LuFactors {
    SmallMatrix lu;
    std::vector<std::size_t> perm;
    double det = 0.0;
    bool singular = false;
};

LuFactors lu_decompose(const SmallMatrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("determinant needs a square matrix");
    }
    const std::size_t n = m.rows();
    LuFactors f{m, {}, 1.0, false};
    f.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.perm[i] = i;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(f.lu.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(f.lu.at(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) {
            f.singular = true;
            f.det = 0.0;
            return f;
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(f.lu.at(pivot, j), f.lu.at(col, j));
            }
            std::swap(f.perm[pivot], f.perm[col]);
            f.det = -f.det;
        }
        const double d = f.lu.at(col, col);
        f.det *= d;
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = f.lu.at(r, col) / d;
            f.lu.at(r, col) = factor;
            for (std::size_t j = col + 1; j < n; ++j) {
                f.lu.at(r, j) -= factor * f.lu.at(col, j);
            }
        }
    }
    return f;
}

// Solves A x = b with precomputed factors.
std::vector<double> lu_solve(const LuFactors& f, std::span<const double> b) {
    const std::size_t n = f.perm.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = b[f.perm[i]];
    }
    for (std::size_t i = 1; i < n; ++i) {
        double acc = x[i];
        for (std::size_t j = 0; j < i; ++j) {
            acc -= f.lu.at(i, j) * x[j];
        }
        x[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            acc -= f.lu.at(i, j) * x[j];
        }
        x[i] = acc / f.lu.at(i, i);
    }
    return x;
}

// Per-coordinate upper bounds of the physical domain inside [0, 1].
std::vector<double> coordinate_bounds(const FeeeTarget& target) {
    const auto a = target.elimination_coefficients();
    const double b = target.offset_coefficient();
    std::vector<double> ub(a.size(), 1.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double asub = 1.0 + a[j];
        if (asub > 0.0) {
            ub[j] = std::min(ub[j], (1.0 - b) / asub);
        }
        if (a[j] < 0.0 && b >= 0.0) {
            ub[j] = std::min(ub[j], b / -a[j]);
        }
        ub[j] = std::max(ub[j], 0.0);
    }
    return ub;
}

double population_value(const FeeeTarget& target, std::span<const double> q,
                        std::size_t population_index) {
    const auto idx = target.free_indices();
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] == population_index) {
            return q[j];
        }
    }
    const auto a = target.elimination_coefficients();
    const double b = target.offset_coefficient();
    double q_sum = 0.0;
    double aq_sum = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
        q_sum += q[j];
        aq_sum += a[j] * q[j];
    }
    if (population_index == target.top_index()) {
        return b + aq_sum;
    }
    return (1.0 - b) - (q_sum + aq_sum);
}

} // namespace

SmallMatrix::SmallMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
        throw DimensionError("matrix side must be between 1 and 64");
    }
    data_.assign(rows * cols, 0.0);
}

SmallMatrix SmallMatrix::identity(std::size_t n) {
    SmallMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.at(i, i) = 1.0;
    }
    return m;
}

double determinant(const SmallMatrix& m) {
    return lu_decompose(m).det;
}

double det_rank1_update(const SmallMatrix& a, std::span<const double> u,
                        std::span<const double> v) {
    if (u.size() != a.rows() || v.size() != a.rows()) {
        throw DimensionError("update vectors must match the matrix side");
    }
    const LuFactors f = lu_decompose(a);
    if (f.singular) {
        throw SingularMatrixError("base matrix is singular");
    }
    const std::vector<double> x = lu_solve(f, u);
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += v[i] * x[i];
    }
    return (1.0 + dot) * f.det;
}

double det_rankk_update(const SmallMatrix& a, const SmallMatrix& u) {
    if (u.rows() != a.rows()) {
        throw DimensionError("update block must match the matrix side");
    }
    const LuFactors f = lu_decompose(a);
    if (f.singular) {
        throw SingularMatrixError("base matrix is singular");
    }
    const std::size_t n = a.rows();
    const std::size_t m = u.cols();
    std::vector<double> col(n);
    SmallMatrix inner = SmallMatrix::identity(m);
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = u.at(i, c);
        }
        const std::vector<double> x = lu_solve(f, col);
        for (std::size_t r = 0; r < m; ++r) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += u.at(i, r) * x[i];
            }
            inner.at(r, c) += dot;
        }
    }
    return determinant(inner) * f.det;
}

MetricDeterminants feee_metric_det(const FreePopulations& free, const FeeeTarget& target) {
    const std::size_t d = target.free_dim();
    if (free.dim() != d) {
        throw DimensionError("free-coordinate dimension does not match the target");
    }
    if (d > SmallMatrix::kMaxDim) {
        throw DimensionError("metric check capped at 64 free coordinates");
    }
    const PopulationVector p = reconstruct(free, target);
    for (double v : p.p) {
        if (!(v > 0.0)) {
            throw DomainError("metric determinant needs a strictly interior point");
        }
    }
    const auto a = target.elimination_coefficients();
    const double f1 = p.p[target.top_index()];
    const double f2 = p.p[target.subtop_index()];

    SmallMatrix g(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            g.at(i, j) = a[i] * a[j] / (4.0 * f1) +
                         (1.0 + a[i]) * (1.0 + a[j]) / (4.0 * f2);
        }
        g.at(i, i) += 1.0 / (4.0 * free.q[i]);
    }

    MetricDeterminants out;
    out.direct = determinant(g);

    double r11 = 0.0;
    double r22 = 0.0;
    double r12 = 0.0;
    double diag = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        r11 += free.q[j] * a[j] * a[j];
        r22 += free.q[j] * (1.0 + a[j]) * (1.0 + a[j]);
        r12 += free.q[j] * a[j] * (1.0 + a[j]);
        diag /= 4.0 * free.q[j];
    }
    r11 /= f1;
    r22 /= f2;
    r12 /= std::sqrt(f1 * f2);
    out.closed_form = ((1.0 + r11) * (1.0 + r22) - r12 * r12) * diag;
    return out;
}

std::vector<double> MarginalTable::density() const {
    const double w = (hi - lo) / static_cast<double>(probability.size());
    std::vector<double> d(probability.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = probability[k] / w;
    }
    return d;
}

MarginalTable feee_marginal_quadrature(const FeeeTarget& target,
                                       std::size_t population_index,
                                       double lo, double hi, int bins,
                                       int resolution) {
    if (target.free_dim() != 2) {
        throw DimensionError("quadrature marginal implemented for four-level targets");
    }
    if (population_index >= target.dim()) {
        throw DimensionError("population index out of range");
    }
    if (!(lo < hi) || bins < 1) {
        throw DomainError("marginal table needs lo < hi and at least one bin");
    }
    if (resolution < 400) {
        throw DomainError("resolution below the supported minimum of 400");
    }

    const std::vector<double> ub = coordinate_bounds(target);
    const double hx = ub[0] / static_cast<double>(resolution);
    const double hy = ub[1] / static_cast<double>(resolution);
    if (!(hx > 0.0) || !(hy > 0.0)) {
        throw DomainError("empty integration box");
    }

    // Corner grids of the density and the tracked population value.
    const std::size_t side = static_cast<std::size_t>(resolution) + 1;
    std::vector<double> dens(side * side);
    std::vector<double> value(side * side);
    FreePopulations q;
    q.q.resize(2);
    for (std::size_t iy = 0; iy < side; ++iy) {
        for (std::size_t ix = 0; ix < side; ++ix) {
            q.q[0] = hx * static_cast<double>(ix);
            q.q[1] = hy * static_cast<double>(iy);
            dens[iy * side + ix] = feee_density(q, target);
            value[iy * side + ix] = population_value(target, q.q, population_index);
        }
    }

    MarginalTable table;
    table.lo = lo;
    table.hi = hi;
    table.probability.assign(static_cast<std::size_t>(bins), 0.0);
    const double bin_w = (hi - lo) / static_cast<double>(bins);
    double out_mass = 0.0;
    double total = 0.0;

    const auto deposit = [&](double mass, double vlo, double vhi) {
        total += mass;
        if (vhi <= lo || vlo >= hi) {
            out_mass += mass;
            return;
        }
        if (vhi - vlo < 1e-15) {
            const auto k = std::min<std::size_t>(
                static_cast<std::size_t>(std::max(0.0, (vlo - lo) / bin_w)),
                table.probability.size() - 1);
            table.probability[k] += mass;
            return;
        }
        // Spread uniformly over [vlo, vhi]; clip to the table range.
        const double inv_span = 1.0 / (vhi - vlo);
        if (vlo < lo) {
            out_mass += mass * (lo - vlo) * inv_span;
        }
        if (vhi > hi) {
            out_mass += mass * (vhi - hi) * inv_span;
        }
        const double clo = std::max(vlo, lo);
        const double chi = std::min(vhi, hi);
        auto k0 = static_cast<std::size_t>((clo - lo) / bin_w);
        auto k1 = static_cast<std::size_t>((chi - lo) / bin_w);
        k0 = std::min(k0, table.probability.size() - 1);
        k1 = std::min(k1, table.probability.size() - 1);
        for (std::size_t k = k0; k <= k1; ++k) {
            const double blo = lo + bin_w * static_cast<double>(k);
            const double bhi = blo + bin_w;
            const double overlap = std::min(chi, bhi) - std::max(clo, blo);
            if (overlap > 0.0) {
                table.probability[k] += mass * overlap * inv_span;
            }
        }
    };

    const double cell_area = hx * hy;
    for (std::size_t iy = 0; iy < static_cast<std::size_t>(resolution); ++iy) {
        for (std::size_t ix = 0; ix < static_cast<std::size_t>(resolution); ++ix) {
            const std::size_t c00 = iy * side + ix;
            const std::size_t c10 = c00 + 1;
            const std::size_t c01 = c00 + side;
            const std::size_t c11 = c01 + 1;
            const double mass =
                0.25 * (dens[c00] + dens[c10] + dens[c01] + dens[c11]) * cell_area;
            if (mass <= 0.0) {
                continue;
            }
            const double v00 = value[c00];
            const double v10 = value[c10];
            const double v01 = value[c01];
            const double v11 = value[c11];
            const double vlo = std::min(std::min(v00, v10), std::min(v01, v11));
            const double vhi = std::max(std::max(v00, v10), std::max(v01, v11));
            deposit(mass, vlo, vhi);
        }
    }

    if (!(total > 0.0)) {
        throw NumericError("quadrature mass vanished over the whole box");
    }
    for (double& m : table.probability) {
        m /= total;
    }
    table.out_of_range_probability = out_mass / total;
    return table;
}

RejectionSummary feee_rejection_sample(const FeeeTarget& target, std::uint64_t count,
                                       RandomStream& rng,
                                       const std::function<void(const PopulationVector&)>& sink) {
    if (target.dim() > 8) {
        throw CapacityError("rejection reference sampler capped at eight levels");
    }
    const std::vector<double> ub = coordinate_bounds(target);
    const std::size_t d = ub.size();
    const auto a = target.elimination_coefficients();
    const double b = target.offset_coefficient();

    // The squared density is affine in the coordinates, so its maximum over
    // the box sits at a corner.
    double max_bracket = 0.0;
    for (std::uint64_t corner = 0; corner < (std::uint64_t{1} << d); ++corner) {
        double bracket = b - b * b;
        for (std::size_t j = 0; j < d; ++j) {
            if (corner & (std::uint64_t{1} << j)) {
                bracket += ub[j] * (1.0 + a[j]) * a[j];
            }
        }
        max_bracket = std::max(max_bracket, bracket);
    }
    if (!(max_bracket > 0.0)) {
        throw BoundError("envelope over the coordinate box is not positive");
    }

    RejectionSummary summary;
    summary.bound = 1.1 * std::sqrt(max_bracket);

    FreePopulations q;
    q.q.resize(d);
    const std::uint64_t max_proposals =
        std::max<std::uint64_t>(1000000, count * 100000);
    while (summary.accepted < count) {
        if (++summary.proposals > max_proposals) {
            throw NumericError("rejection sampler acceptance rate too low");
        }
        for (std::size_t j = 0; j < d; ++j) {
            q.q[j] = ub[j] * rng.uniform_half_open();
        }
        const double dens = feee_density(q, target);
        if (dens > summary.bound) {
            throw BoundError("density exceeded the rejection envelope");
        }
        const double u = rng.uniform_half_open();
        if (u * summary.bound < dens) {
            ++summary.accepted;
            sink(reconstruct(q, target));
        }
    }
    return summary;
}

double rpse_exact_mean_entropy(std::size_t n_states) {
    if (n_states < 1) {
        throw DomainError("need at least one state");
    }
    double acc = 0.0;
    for (std::size_t k = n_states; k >= 2; --k) {
        acc += 1.0 / static_cast<double>(k);
    }
    return acc;
}

double rpse_marginal_cdf(double p, std::size_t n_states) {
    if (n_states < 2) {
        throw DomainError("marginal defined for two or more states");
    }
    if (p <= 0.0) {
        return 0.0;
    }
    if (p >= 1.0) {
        return 1.0;
    }
    return 1.0 - std::pow(1.0 - p, static_cast<double>(n_states - 1));
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw InsufficientDataError("no samples");
    }
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    }
    return d;
}

} // namespace qse
