#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ratelab {

// Source laws. Multivariate continuous families are products of iid 1-D
// marginals per coordinate; a point-mass mixture carries d-dimensional atoms.

struct Atom {
    std::vector<double> point;
    double weight = 0.0;
};

struct PointMassMixture {
    std::vector<Atom> atoms;
};

// Density a*scale^a / x^(a+1) on [scale, inf). Moments of order >= a diverge.
struct Pareto {
    double shape = 1.0;
    double scale = 1.0;
};

// scale * t_nu. Moments of order >= nu diverge.
struct StudentT {
    double nu = 1.0;
    double scale = 1.0;
};

// exp(N(log_mean, log_stddev^2)). Heavy-tailed, yet every moment is finite.
struct Lognormal {
    double log_mean = 0.0;
    double log_stddev = 1.0;
};

struct Gaussian {
    double mean = 0.0;
    double stddev = 1.0;
};

struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
};

using FamilyParams =
    std::variant<PointMassMixture, Pareto, StudentT, Lognormal, Gaussian, Uniform>;

struct DistributionSpec {
    FamilyParams family;
    int dim = 1;
};

// Throws std::invalid_argument when parameters are out of range (weights not
// summing to 1 within 1e-12, non-positive shapes/scales, atom dim mismatch...).
void validate(const DistributionSpec& spec);

std::string family_name(const DistributionSpec& spec);

struct Sample {
    std::vector<double> data;  // n x dim, row-major
    std::size_t n = 0;
    int dim = 1;
    uint64_t seed = 0;
    DistributionSpec spec;

    std::span<const double> point(std::size_t i) const {
        return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
};

// n iid draws, deterministic in (spec, n, seed). Point i is a pure function of
// (seed, i), so any prefix of a longer run reproduces bit-identically and
// points may be generated concurrently in any order.
Sample sample(const DistributionSpec& spec, std::size_t n, uint64_t seed);

// Fills points [begin, end) of a conceptual run; used by the samplers above
// and by callers that shard generation across threads.
void sample_into(const DistributionSpec& spec, uint64_t seed, std::size_t begin,
                 std::size_t end, std::span<double> out);

// Smallest order whose absolute moment diverges: Pareto -> shape,
// StudentT -> nu, +infinity for the other families.
double max_finite_moment_order(const DistributionSpec& spec);

// E ||X||^order. Closed form where available (Pareto, StudentT, Gaussian,
// Lognormal, Uniform, point masses, even-order products); adaptive quadrature
// otherwise, certified to 1e-9 absolute (or 1e-12 relative for large values).
// Returns +infinity when order >= max_finite_moment_order.
double moment(const DistributionSpec& spec, double order);

// Envelope norm for the distortion class over the box (-rho, rho)^(d*k):
// ((1/2) E||X||^(2r) + (1/2) rho^(2r))^(1/r). Infinite iff moment(spec, 2r) is.
double envelope_bound(const DistributionSpec& spec, double rho, double r);

// Per-coordinate mean / variance vectors. Throw std::domain_error when the
// requested moment does not exist (e.g. Pareto shape <= 1).
std::vector<double> mean_vector(const DistributionSpec& spec);
std::vector<double> variance_vector(const DistributionSpec& spec);

// Quantile function of the 1-D marginal, u in (0,1). Point-mass mixtures are
// excluded (their sampler walks cumulative weights directly).
double marginal_quantile(const DistributionSpec& spec, double u);

// Standard normal quantile, accurate in both tails.
double standard_normal_quantile(double u);

}  // namespace ratelab
