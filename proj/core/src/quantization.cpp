#include "ratelab/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ratelab/math.hpp"
#include "ratelab/rng.hpp"

namespace ratelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_param(const std::string& msg) { throw std::invalid_argument(msg); }

std::vector<double> distortions(const Codebook& cb, const Sample& sample) {
    std::vector<double> out(sample.n);
    for (std::size_t i = 0; i < sample.n; ++i) out[i] = distortion(cb, sample.point(i));
    return out;
}

// --- Exact 1-D ERM -------------------------------------------------------
//
// Optimal 1-D clusters are contiguous in sorted order, so a layered DP over
// split positions finds the global optimum. The interval cost
//   w(a,b) = min_{|c| <= rho'} sum_{i=a..b} (x_i - c)^2
// satisfies the quadrangle inequality (also under clipping, since restricting
// the center to an interval keeps (x - c)^2 a Monge kernel), which makes the
// per-layer argmin monotone and enables divide-and-conquer filling.
class Segment1D {
public:
    Segment1D(std::vector<double> sorted, double rho)
        : x_(std::move(sorted)), lo_(-rho + kBoxMargin), hi_(rho - kBoxMargin) {
        s1_.resize(x_.size() + 1, 0.0L);
        s2_.resize(x_.size() + 1, 0.0L);
        for (std::size_t i = 0; i < x_.size(); ++i) {
            s1_[i + 1] = s1_[i] + static_cast<long double>(x_[i]);
            s2_[i + 1] = s2_[i] + static_cast<long double>(x_[i]) * x_[i];
        }
    }

    double center(std::size_t a, std::size_t b) const {  // inclusive
        const auto cnt = static_cast<long double>(b - a + 1);
        const double mean = static_cast<double>((s1_[b + 1] - s1_[a]) / cnt);
        return std::clamp(mean, lo_, hi_);
    }

    double cost(std::size_t a, std::size_t b) const {
        const auto cnt = static_cast<long double>(b - a + 1);
        const long double sum1 = s1_[b + 1] - s1_[a];
        const long double sum2 = s2_[b + 1] - s2_[a];
        const long double c = center(a, b);
        const long double v = sum2 - 2.0L * c * sum1 + cnt * c * c;
        return std::max(0.0, static_cast<double>(v));
    }

    std::size_t size() const { return x_.size(); }
    const std::vector<double>& points() const { return x_; }

private:
    std::vector<double> x_;
    std::vector<long double> s1_, s2_;
    double lo_, hi_;
};

struct Dp1DResult {
    std::vector<std::pair<std::size_t, std::size_t>> clusters;  // inclusive ranges
};

Dp1DResult dp_kmeans_1d(const Segment1D& seg, int k) {
    const std::size_t n = seg.size();
    const auto layers = static_cast<std::size_t>(std::min<std::size_t>(k, n));
    std::vector<double> prev(n), cur(n);
    std::vector<std::vector<uint32_t>> split(layers, std::vector<uint32_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) prev[i] = seg.cost(0, i);

    for (std::size_t layer = 1; layer < layers; ++layer) {
        auto& choice = split[layer];
        // Fill cur[i] = min over s in [layer, i] of prev[s-1] + cost(s, i),
        // divide-and-conquer over the monotone argmin.
        const auto fill = [&](auto&& self, std::size_t ilo, std::size_t ihi, std::size_t slo,
                              std::size_t shi) -> void {
            if (ilo > ihi) return;
            const std::size_t mid = ilo + (ihi - ilo) / 2;
            double best = kInf;
            std::size_t best_s = slo;
            const std::size_t s_end = std::min(shi, mid);
            for (std::size_t s = std::max(slo, layer); s <= s_end; ++s) {
                const double v = prev[s - 1] + seg.cost(s, mid);
                if (v < best) {
                    best = v;
                    best_s = s;
                }
            }
            cur[mid] = best;
            choice[mid] = static_cast<uint32_t>(best_s);
            if (mid > ilo) self(self, ilo, mid - 1, slo, best_s);
            if (mid < ihi) self(self, mid + 1, ihi, best_s, shi);
        };
        fill(fill, layer, n - 1, layer, n - 1);
        for (std::size_t i = 0; i < layer; ++i) cur[i] = prev[i];  // fewer points than layers
        std::swap(prev, cur);
    }

    Dp1DResult out;
    std::size_t hi = n - 1;
    for (std::size_t layer = layers; layer-- > 0;) {
        const std::size_t lo = layer == 0 ? 0 : split[layer][hi];
        out.clusters.push_back({lo, hi});
        if (lo == 0) break;
        hi = lo - 1;
    }
    std::reverse(out.clusters.begin(), out.clusters.end());
    return out;
}

Codebook erm_exact_1d(const Sample& sample, int k, double rho) {
    std::vector<double> sorted(sample.data.begin(), sample.data.end());
    std::sort(sorted.begin(), sorted.end());
    Segment1D seg(std::move(sorted), rho);
    const auto dp = dp_kmeans_1d(seg, k);

    Codebook cb;
    cb.k = k;
    cb.d = 1;
    cb.rho = rho;
    for (const auto& [a, b] : dp.clusters) cb.centers.push_back(seg.center(a, b));
    while (static_cast<int>(cb.centers.size()) < k) cb.centers.push_back(cb.centers.back());
    return cb;
}

// --- Brute force over partitions -----------------------------------------

Codebook codebook_from_partition(const Sample& sample, std::span<const int> labels,
                                 int groups, int k, double rho) {
    const int d = sample.dim;
    Codebook cb;
    cb.k = k;
    cb.d = d;
    cb.rho = rho;
    cb.centers.assign(static_cast<std::size_t>(k) * d, 0.0);
    std::vector<int> count(groups, 0);
    for (std::size_t i = 0; i < sample.n; ++i) {
        const auto g = labels[i];
        ++count[g];
        const auto x = sample.point(i);
        for (int j = 0; j < d; ++j) cb.centers[static_cast<std::size_t>(g) * d + j] += x[j];
    }
    for (int g = 0; g < groups; ++g)
        for (int j = 0; j < d; ++j) {
            auto& c = cb.centers[static_cast<std::size_t>(g) * d + j];
            c = clip_to_box(count[g] > 0 ? c / count[g] : 0.0, rho);
        }
    for (int g = groups; g < k; ++g)
        for (int j = 0; j < d; ++j)
            cb.centers[static_cast<std::size_t>(g) * d + j] =
                cb.centers[static_cast<std::size_t>(groups - 1) * d + j];
    return cb;
}

Codebook erm_brute_force(const Sample& sample, int k, double rho) {
    if (sample.n > 12) bad_param("BruteForceTiny: n must be <= 12");
    if (sample.dim * k > 16) bad_param("BruteForceTiny: d*k must be <= 16");

    std::vector<int> labels(sample.n, 0);
    Codebook best;
    double best_risk = kInf;
    // Canonical enumeration: point 0 opens group 0, each later point joins an
    // existing group or opens the next one, up to k groups.
    const auto recurse = [&](auto&& self, std::size_t i, int groups) -> void {
        if (i == sample.n) {
            const Codebook cb = codebook_from_partition(sample, labels, groups, k, rho);
            const double risk = empirical_risk(cb, sample);
            if (risk < best_risk) {
                best_risk = risk;
                best = cb;
            }
            return;
        }
        for (int g = 0; g <= groups && g < k; ++g) {
            labels[i] = g;
            self(self, i + 1, std::max(groups, g + 1));
        }
    };
    recurse(recurse, 0, 0);
    return best;
}

// --- Lloyd with k-means++ seeding -----------------------------------------

struct LloydRun {
    Codebook codebook;
    double risk = kInf;
};

LloydRun lloyd_once(const Sample& sample, int k, double rho, uint64_t key, int max_iters) {
    const int d = sample.dim;
    const std::size_t n = sample.n;
    Draw draw(key, 0);

    Codebook cb;
    cb.k = k;
    cb.d = d;
    cb.rho = rho;
    cb.centers.assign(static_cast<std::size_t>(k) * d, 0.0);

    // k-means++ seeding.
    std::vector<double> dist2(n, kInf);
    const auto set_center = [&](int c, std::span<const double> x) {
        for (int j = 0; j < d; ++j) cb.centers[static_cast<std::size_t>(c) * d + j] = clip_to_box(x[j], rho);
    };
    set_center(0, sample.point(draw.below(n)));
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            const auto x = sample.point(i);
            const auto prev = cb.center(c - 1);
            for (int j = 0; j < d; ++j) {
                const double diff = x[j] - prev[j];
                d2 += diff * diff;
            }
            dist2[i] = std::min(dist2[i], d2);
            total += dist2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = draw.u01() * total;
            double cum = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                cum += dist2[i];
                if (target < cum) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = draw.below(n);
        }
        set_center(c, sample.point(pick));
    }

    std::vector<int> assign(n, -1);
    std::vector<double> sums(static_cast<std::size_t>(k) * d);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int nearest = distortion_at(cb, sample.point(i)).nearest;
            if (nearest != assign[i]) {
                assign[i] = nearest;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = sample.point(i);
            ++counts[assign[i]];
            for (int j = 0; j < d; ++j) sums[static_cast<std::size_t>(assign[i]) * d + j] += x[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Reeseed an empty cluster at the currently worst-served point.
                std::size_t worst = 0;
                double worst_d2 = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d2 = distortion(cb, sample.point(i));
                    if (d2 > worst_d2) {
                        worst_d2 = d2;
                        worst = i;
                    }
                }
                set_center(c, sample.point(worst));
                continue;
            }
            for (int j = 0; j < d; ++j)
                cb.centers[static_cast<std::size_t>(c) * d + j] =
                    clip_to_box(sums[static_cast<std::size_t>(c) * d + j] / counts[c], rho);
        }
    }

    return {cb, empirical_risk(cb, sample)};
}

Codebook erm_lloyd(const Sample& sample, int k, double rho, const ErmOptions& options) {
    if (options.restarts < 1) bad_param("LloydMultistart: restart count must be >= 1");
    LloydRun best;
    for (int r = 0; r < options.restarts; ++r) {
        const uint64_t key = mix_seed(mix_seed(sample.seed, options.seed_tag), static_cast<uint64_t>(r));
        LloydRun run = lloyd_once(sample, k, rho, key, options.max_iterations);
        if (run.risk < best.risk) best = std::move(run);  // ties keep the lowest restart index
    }
    return best.codebook;
}

}  // namespace

void validate(const Codebook& cb) {
    if (cb.k < 1) bad_param("Codebook: k must be >= 1");
    if (cb.d < 1) bad_param("Codebook: d must be >= 1");
    if (!(cb.rho > 0.0)) bad_param("Codebook: rho must be > 0");
    if (cb.centers.size() != static_cast<std::size_t>(cb.k) * cb.d)
        bad_param("Codebook: centers size != k*d");
    for (double c : cb.centers)
        if (!(std::abs(c) < cb.rho)) bad_param("Codebook: center outside the open box");
}

double clip_to_box(double v, double rho) {
    return std::clamp(v, -rho + kBoxMargin, rho - kBoxMargin);
}

DistortionResult distortion_at(const Codebook& cb, std::span<const double> x) {
    if (static_cast<int>(x.size()) != cb.d) bad_param("distortion: dimension mismatch");
    DistortionResult best{kInf, 0};
    for (int c = 0; c < cb.k; ++c) {
        const auto y = cb.center(c);
        double d2 = 0.0;
        for (int j = 0; j < cb.d; ++j) {
            const double diff = x[j] - y[j];
            d2 += diff * diff;
        }
        if (d2 < best.value) best = {d2, c};
    }
    return best;
}

double distortion(const Codebook& cb, std::span<const double> x) {
    return distortion_at(cb, x).value;
}

double empirical_risk(const Codebook& cb, const Sample& sample) {
    if (sample.n == 0) bad_param("empirical_risk: empty sample");
    if (sample.dim != cb.d) bad_param("empirical_risk: dimension mismatch");
    const auto d2 = distortions(cb, sample);
    return pairwise_mean(d2);
}

Codebook erm(const Sample& sample, int k, double rho, ErmStrategy strategy,
             const ErmOptions& options) {
    if (k < 1) bad_param("erm: k must be >= 1");
    if (!(rho > 0.0)) bad_param("erm: rho must be > 0");
    if (sample.n == 0) bad_param("erm: empty sample");
    switch (strategy) {
        case ErmStrategy::Exact1D:
            if (sample.dim != 1) bad_param("Exact1D requires d = 1");
            return erm_exact_1d(sample, k, rho);
        case ErmStrategy::BruteForceTiny:
            return erm_brute_force(sample, k, rho);
        case ErmStrategy::LloydMultistart:
            return erm_lloyd(sample, k, rho, options);
    }
    bad_param("erm: unknown strategy");
}

RiskEstimate true_risk(const Codebook& cb, const DistributionSpec& spec,
                       const RiskOracle& oracle) {
    validate(cb);
    if (spec.dim != cb.d) bad_param("true_risk: spec/codebook dimension mismatch");
    switch (oracle.mode) {
        case RiskOracle::Mode::ExactDiscrete: {
            const auto* mix = std::get_if<PointMassMixture>(&spec.family);
            if (!mix) bad_param("ExactDiscrete oracle requested for a continuous spec");
            double risk = 0.0;
            for (const auto& a : mix->atoms) risk += a.weight * distortion(cb, a.point);
            return {risk, 0.0};
        }
        case RiskOracle::Mode::ClosedFormK1: {
            if (cb.k != 1) bad_param("ClosedFormK1 oracle supports single-center codebooks only");
            const auto mean = mean_vector(spec);
            const auto var = variance_vector(spec);
            double risk = 0.0;
            const auto c = cb.center(0);
            for (int j = 0; j < cb.d; ++j) {
                const double diff = mean[j] - c[j];
                risk += var[j] + diff * diff;
            }
            return {risk, 0.0};
        }
        case RiskOracle::Mode::MonteCarlo: {
            if (!oracle.oracle_sample) bad_param("MonteCarlo oracle has no sample attached");
            const auto d2 = distortions(cb, *oracle.oracle_sample);
            const auto mv = mean_variance(d2);
            return {mv.mean, mv.se_mean()};
        }
    }
    bad_param("true_risk: unknown oracle mode");
}

ExcessRisk excess_risk(const Codebook& cb, const DistributionSpec& spec,
                       const RiskOracle& oracle) {
    const double risk = true_risk(cb, spec, oracle).value;
    const double diff = risk - oracle.optimum_risk;
    ExcessRisk out;
    out.clipped = diff < 0.0;
    out.value = std::max(0.0, diff);
    return out;
}

RiskOracle make_oracle(const DistributionSpec& spec, int k, double rho,
                       const OracleConfig& config) {
    validate(spec);
    if (k < 1) bad_param("make_oracle: k must be >= 1");
    RiskOracle oracle;
    oracle.mode = config.mode;
    oracle.oracle_n = config.n;
    oracle.oracle_seed = config.seed;

    if (config.mode == RiskOracle::Mode::MonteCarlo)
        oracle.oracle_sample = std::make_shared<const Sample>(sample(spec, config.n, config.seed));

    const auto* mix = std::get_if<PointMassMixture>(&spec.family);
    if (k == 1) {
        const auto mean = mean_vector(spec);
        Codebook cstar;
        cstar.k = 1;
        cstar.d = spec.dim;
        cstar.rho = rho;
        for (double m : mean) cstar.centers.push_back(clip_to_box(m, rho));
        oracle.reference_optimum = cstar;
        oracle.provenance = RiskOracle::Provenance::Constructed;
    } else if (mix && static_cast<int>(mix->atoms.size()) <= k) {
        // Enough centers to sit on every atom: zero risk by construction.
        Codebook cstar;
        cstar.k = k;
        cstar.d = spec.dim;
        cstar.rho = rho;
        for (const auto& a : mix->atoms)
            for (double v : a.point) cstar.centers.push_back(clip_to_box(v, rho));
        while (static_cast<int>(cstar.centers.size()) < k * spec.dim)
            cstar.centers.push_back(cstar.centers[cstar.centers.size() - spec.dim]);
        oracle.reference_optimum = cstar;
        oracle.provenance = RiskOracle::Provenance::Constructed;
    } else {
        // Estimate the optimum by ERM on the oracle-scale sample.
        std::shared_ptr<const Sample> fit_sample = oracle.oracle_sample;
        if (!fit_sample)
            fit_sample = std::make_shared<const Sample>(sample(spec, config.n, config.seed));
        oracle.reference_optimum =
            erm(*fit_sample, k, rho,
                spec.dim == 1 ? ErmStrategy::Exact1D : ErmStrategy::LloydMultistart);
        oracle.provenance = RiskOracle::Provenance::Estimated;
    }

    oracle.optimum_risk = true_risk(oracle.reference_optimum, spec, oracle).value;
    oracle.optimum_interior = true;
    for (double c : oracle.reference_optimum.centers)
        if (std::abs(c) >= rho - 2.0 * kBoxMargin) oracle.optimum_interior = false;
    oracle.optima = {oracle.reference_optimum};
    return oracle;
}

Codebook random_codebook(int k, int d, double rho, uint64_t key, uint64_t slot) {
    Draw draw(key, slot);
    Codebook cb;
    cb.k = k;
    cb.d = d;
    cb.rho = rho;
    cb.centers.resize(static_cast<std::size_t>(k) * d);
    for (auto& c : cb.centers) c = clip_to_box(rho * (2.0 * draw.u01() - 1.0), rho);
    return cb;
}

LipschitzEstimate estimate_loss_lipschitz(const DistributionSpec& spec, int k, double rho,
                                          std::size_t pairs, std::size_t mc_n, uint64_t seed) {
    if (pairs == 0 || mc_n == 0) bad_param("estimate_loss_lipschitz: pairs and mc_n must be >= 1");
    const Sample mc = sample(spec, mc_n, mix_seed(seed, 0x4C6970));
    LipschitzEstimate out;
    out.pairs = pairs;
    // Pairs at geometrically spaced separations, from near-coincident to
    // box-scale: the ratio is largest for local pairs, which a far-pair-only
    // sample would miss. The slope is the 1/x^2-weighted through-origin
    // regression, i.e. the mean of per-pair ratios.
    double ratio_sum = 0.0;
    std::size_t used = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
        const Codebook a = random_codebook(k, spec.dim, rho, seed, 2 * p);
        Codebook b = a;
        Draw draw(mix_seed(seed, 0x706169), p);
        const double scale =
            rho * 1e-3 * std::pow(1e3, static_cast<double>(p % 16) / 15.0);
        for (auto& c : b.centers)
            c = clip_to_box(c + scale * (2.0 * draw.u01() - 1.0), rho);
        double param_dist2 = 0.0;
        for (std::size_t j = 0; j < a.centers.size(); ++j) {
            const double diff = a.centers[j] - b.centers[j];
            param_dist2 += diff * diff;
        }
        if (param_dist2 == 0.0) continue;
        std::vector<double> sq(mc.n);
        for (std::size_t i = 0; i < mc.n; ++i) {
            const double diff = distortion(a, mc.point(i)) - distortion(b, mc.point(i));
            sq[i] = diff * diff;
        }
        const double ratio = pairwise_mean(sq) / param_dist2;
        ratio_sum += ratio;
        out.max_ratio = std::max(out.max_ratio, ratio);
        ++used;
    }
    if (used == 0) bad_param("estimate_loss_lipschitz: degenerate codebook pairs");
    out.l_hat = ratio_sum / static_cast<double>(used);
    return out;
}

}  // namespace ratelab
