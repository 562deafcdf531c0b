#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratelab/bounds.hpp"
#include "ratelab/quantization.hpp"

namespace ratelab {

// One hypothesis with both loss-difference moments measured against its
// nearest global optimum: excess = E[dloss], second_moment = E[dloss^2].
struct HypothesisProbe {
    Codebook codebook;
    double excess = 0.0;
    double second_moment = 0.0;
    int nearest_optimum = 0;
    double se_excess = 0.0;
    double se_second = 0.0;
};

// Evaluates the probe moments for each codebook. The oracle must carry the
// list of global optima; each probe is paired with the nearest one in
// parameter distance (centers sorted first for d = 1, where distinct optima
// only differ by ordering).
std::vector<HypothesisProbe> probe(const std::vector<Codebook>& codebooks,
                                   const DistributionSpec& spec, const RiskOracle& oracle);

struct BernsteinRegionFit {
    std::string region;      // "near" or "far"
    double gamma_hat = 1.0;  // clipped into (0, 1]
    double gamma_se = 0.0;
    double b_hat = 1.0;      // max-residual constant: covers every probe in the region
    bool satisfied = true;   // false when gamma clipping fired
    bool gamma_clipped = false;
    std::size_t count = 0;
    std::size_t dropped_zero_excess = 0;
};

struct BernsteinFit {
    std::vector<BernsteinRegionFit> pieces;
    double tau = 0.0;
};

// Splits probes at excess-risk threshold tau (near: excess <= tau) and fits
// a power law per region: gamma_hat is the log-log regression slope, b_hat
// the max residual, so second <= b_hat * excess^gamma_hat holds at every
// fitted probe by construction. Throws on degenerate regressions.
BernsteinFit fit_multiscale(const std::vector<HypothesisProbe>& probes, double tau);

// Default region threshold: the far-field risk-ratio condition at alpha = 2M
// translated to excess risk, which is exactly R(C*).
double default_tau(const RiskOracle& oracle);

struct ProbeViolation {
    std::size_t probe_index = 0;
    double second_moment = 0.0;
    double allowed = 0.0;
};

// Direct check of the multi-scale condition: probes where
// second > B_i * excess^gamma_i + 3 * propagated SE. Pieces are matched to
// tau-regions by label ("near"/"far"); a single-piece profile applies to all.
std::vector<ProbeViolation> check_condition(const std::vector<HypothesisProbe>& probes,
                                            const BernsteinProfile& profile, double tau);

// Probe placement covering both scales: rays from each optimum in random
// directions at geometrically spaced parameter distances, plus uniform
// codebooks in the box.
std::vector<Codebook> make_probe_codebooks(const RiskOracle& oracle, int k, int d, double rho,
                                           std::size_t count, uint64_t seed);

// Closed-form k = 1 moments for a product spec with mean mu and coordinate
// variances sigma_j^2: excess = ||t||^2 and
// second = ||t||^4 + 4 sum_j sigma_j^2 t_j^2 with t = c - mu.
struct K1Moments {
    double excess = 0.0;
    double second_moment = 0.0;
};
K1Moments k1_closed_form_moments(const DistributionSpec& spec, const Codebook& cb);

}  // namespace ratelab
