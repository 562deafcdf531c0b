#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratelab {

// Pairwise summation in index order. Deterministic for a fixed input order
// regardless of how the values were produced, with O(log n) error growth.
double pairwise_sum(std::span<const double> values);

inline double pairwise_mean(std::span<const double> values) {
    return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // unbiased (n-1) estimate, 0 when n < 2
    std::size_t n = 0;
    double se_mean() const;
};

MeanVar mean_variance(std::span<const double> values);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;   // residual-based, 0 when the fit is exact
    double r_squared = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

// Quantile of a sorted sample: median averages the two middle order statistics,
// other levels use the ceil(p*n) order statistic. Deterministic by construction.
double quantile_sorted(std::span<const double> sorted, double p);

struct QuantileBracket {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

// Distribution-free order-statistic bracket for the p-quantile at z standard
// errors (binomial ranks p*n -/+ z*sqrt(n p (1-p))).
QuantileBracket quantile_bracket(std::span<const double> sorted, double p, double z);

}  // namespace ratelab
