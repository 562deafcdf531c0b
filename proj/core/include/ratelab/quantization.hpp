#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ratelab/distributions.hpp"

namespace ratelab {

// k cluster centers in the open box (-rho, rho)^(d*k), stored row-major.
struct Codebook {
    std::vector<double> centers;  // k x d
    int k = 0;
    int d = 1;
    double rho = 1.0;

    std::span<const double> center(int i) const {
        return {centers.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }
    std::span<double> center(int i) {
        return {centers.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }
};

void validate(const Codebook& cb);

// Keeps centers strictly inside the open box.
inline constexpr double kBoxMargin = 1e-12;
double clip_to_box(double v, double rho);

// Squared distance to the nearest center; ties resolved to the lowest index.
struct DistortionResult {
    double value = 0.0;
    int nearest = 0;
};
DistortionResult distortion_at(const Codebook& cb, std::span<const double> x);
double distortion(const Codebook& cb, std::span<const double> x);

// Mean distortion over the sample, accumulated by index-ordered pairwise
// summation so the result does not depend on evaluation schedule.
double empirical_risk(const Codebook& cb, const Sample& sample);

enum class ErmStrategy { Exact1D, BruteForceTiny, LloydMultistart };

struct ErmOptions {
    int restarts = 32;       // Lloyd multistart count
    int max_iterations = 256;
    uint64_t seed_tag = 0;   // mixed with the sample seed for Lloyd seeding
};

// Empirical risk minimizer over codebooks in the box.
//  Exact1D        - global optimum for d = 1 via dynamic programming over
//                   sorted points (optimal 1-D clusters are contiguous).
//  BruteForceTiny - exhaustive partition search, n <= 12 and d*k <= 16.
//  LloydMultistart- best of `restarts` k-means++ seeded Lloyd runs; may be a
//                   local optimum, which callers surface as a caveat.
Codebook erm(const Sample& sample, int k, double rho, ErmStrategy strategy,
             const ErmOptions& options = {});

struct RiskEstimate {
    double value = 0.0;
    double se = 0.0;  // 0 for exact oracles
};

// Ground-truth risk access. ExactDiscrete sums over mixture atoms;
// MonteCarlo evaluates on one fixed shared sample; ClosedFormK1 uses the
// exact identity R(c) = sum_j [var_j + (mean_j - c_j)^2] for single-center
// codebooks.
struct RiskOracle {
    enum class Mode { ExactDiscrete, MonteCarlo, ClosedFormK1 };
    enum class Provenance { Constructed, Estimated };

    Mode mode = Mode::MonteCarlo;
    std::size_t oracle_n = 1'000'000;
    uint64_t oracle_seed = 0;
    Codebook reference_optimum;
    double optimum_risk = 0.0;
    Provenance provenance = Provenance::Constructed;
    bool optimum_interior = true;  // recorded, not enforced
    std::vector<Codebook> optima;  // all known global optima (>= 1 entry)
    std::shared_ptr<const Sample> oracle_sample;  // MonteCarlo only
};

struct OracleConfig {
    RiskOracle::Mode mode = RiskOracle::Mode::MonteCarlo;
    std::size_t n = 1'000'000;
    uint64_t seed = 915170623;
};

// Builds the oracle for (spec, k, rho): the reference optimum comes from the
// construction when it is known exactly (k = 1 means; point-mass mixtures
// hit by k centers) and from ERM on the oracle sample otherwise.
RiskOracle make_oracle(const DistributionSpec& spec, int k, double rho,
                       const OracleConfig& config = {});

RiskEstimate true_risk(const Codebook& cb, const DistributionSpec& spec,
                       const RiskOracle& oracle);

struct ExcessRisk {
    double value = 0.0;
    bool clipped = false;  // true when R(C) - R(C*) < 0 was clipped (MC noise)
};

ExcessRisk excess_risk(const Codebook& cb, const DistributionSpec& spec,
                       const RiskOracle& oracle);

// Through-origin regression of E[(loss(C) - loss(C'))^2] on ||C - C'||^2 over
// random codebook pairs; the loss-to-parameter Lipschitz constant feeding the
// net radius certificates.
struct LipschitzEstimate {
    double l_hat = 0.0;
    double max_ratio = 0.0;
    std::size_t pairs = 0;
};

LipschitzEstimate estimate_loss_lipschitz(const DistributionSpec& spec, int k, double rho,
                                          std::size_t pairs, std::size_t mc_n, uint64_t seed);

// Uniformly random codebook in the box; used by probe placement and tests.
Codebook random_codebook(int k, int d, double rho, uint64_t key, uint64_t slot);

}  // namespace ratelab
