#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qse/feee.hpp"
#include "qse/rng.hpp"

namespace qse {

/// Dense row-major matrix for brute-force cross-checks; capped at 64 per side
/// so a direct pivoted elimination stays cheap and accurate.
class SmallMatrix {
public:
    static constexpr std::size_t kMaxDim = 64;

    SmallMatrix(std::size_t rows, std::size_t cols);
    static SmallMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// Determinant by partial-pivot elimination; zero for singular input.
double determinant(const SmallMatrix& m);

/// det(A + u v^T) through the rank-one update identity
/// (1 + v^T A^{-1} u) det(A).  Throws SingularMatrixError when A is singular.
double det_rank1_update(const SmallMatrix& a, std::span<const double> u,
                        std::span<const double> v);

/// det(A + U U^T) through det(I_m + U^T A^{-1} U) det(A) for an n x m block U.
double det_rankk_update(const SmallMatrix& a, const SmallMatrix& u);

struct MetricDeterminants {
    double direct = 0.0;      ///< pivoted elimination of the assembled matrix
    double closed_form = 0.0; ///< two successive rank-one update identities
};

/// Population-block metric determinant of the fixed-energy ensemble at an
/// interior point, evaluated both directly and through the closed form
/// ((1+R11)(1+R22) - R12^2) prod_j 1/(4 q_j).  Requires every population
/// strictly positive.
MetricDeterminants feee_metric_det(const FreePopulations& free, const FeeeTarget& target);

struct MarginalTable {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> probability;    ///< per-bin mass, normalized over everything seen
    double out_of_range_probability = 0.0;

    std::vector<double> density() const;
};

/// Deterministic marginal distribution of one population for four-level
/// targets, by trapezoidal quadrature of the ensemble density over the two
/// free coordinates.  Cell mass is the corner-averaged density (infeasible
/// corners contribute zero), spread over the population's value range across
/// the cell, so the table is stable under grid refinement.
MarginalTable feee_marginal_quadrature(const FeeeTarget& target,
                                       std::size_t population_index,
                                       double lo, double hi, int bins,
                                       int resolution = 800);

struct RejectionSummary {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    double bound = 0.0;
};

/// Exact-law reference sampler for small targets (dimension at most eight):
/// uniform proposals over the coordinate bounding box, accepted against an
/// envelope taken from the box corners (the squared density is linear in the
/// coordinates) with a 1.1 safety factor.  A density value above the
/// envelope throws BoundError.
RejectionSummary feee_rejection_sample(const FeeeTarget& target, std::uint64_t count,
                                       RandomStream& rng,
                                       const std::function<void(const PopulationVector&)>& sink);

/// Exact mean entropy of the uniform pure-state ensemble: sum_{k=2}^{N} 1/k.
double rpse_exact_mean_entropy(std::size_t n_states);

/// Distribution function of a single population under the uniform ensemble,
/// 1 - (1-p)^{N-1}.
double rpse_marginal_cdf(double p, std::size_t n_states);

/// Kolmogorov-Smirnov distance between a sample and a reference distribution
/// function.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

} // namespace qse
