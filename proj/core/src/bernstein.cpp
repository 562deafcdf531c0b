#include "ratelab/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ratelab/math.hpp"
#include "ratelab/rng.hpp"

namespace ratelab {

namespace {

[[noreturn]] void bad_param(const std::string& msg) { throw std::invalid_argument(msg); }

std::vector<double> canonical_params(const Codebook& cb) {
    std::vector<double> p(cb.centers);
    if (cb.d == 1) std::sort(p.begin(), p.end());
    return p;
}

double param_dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

int nearest_optimum_index(const Codebook& cb, const std::vector<Codebook>& optima) {
    const auto p = canonical_params(cb);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < optima.size(); ++i) {
        const double d = param_dist2(p, canonical_params(optima[i]));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace

K1Moments k1_closed_form_moments(const DistributionSpec& spec, const Codebook& cb) {
    if (cb.k != 1) bad_param("k1_closed_form_moments: codebook must have k = 1");
    const auto mean = mean_vector(spec);
    const auto var = variance_vector(spec);
    K1Moments out;
    double cross = 0.0;
    const auto c = cb.center(0);
    for (int j = 0; j < cb.d; ++j) {
        const double t = c[j] - mean[j];
        out.excess += t * t;
        cross += var[j] * t * t;
    }
    out.second_moment = out.excess * out.excess + 4.0 * cross;
    return out;
}

std::vector<HypothesisProbe> probe(const std::vector<Codebook>& codebooks,
                                   const DistributionSpec& spec, const RiskOracle& oracle) {
    if (oracle.optima.empty()) bad_param("probe: oracle carries no global optima");
    std::vector<HypothesisProbe> out;
    out.reserve(codebooks.size());

    for (const auto& cb : codebooks) {
        HypothesisProbe p;
        p.codebook = cb;
        p.nearest_optimum = nearest_optimum_index(cb, oracle.optima);
        const Codebook& opt = oracle.optima[static_cast<std::size_t>(p.nearest_optimum)];

        switch (oracle.mode) {
            case RiskOracle::Mode::ExactDiscrete: {
                const auto* mix = std::get_if<PointMassMixture>(&spec.family);
                if (!mix) bad_param("probe: ExactDiscrete oracle on a continuous spec");
                double m1 = 0.0, m2 = 0.0;
                for (const auto& a : mix->atoms) {
                    const double dl = distortion(cb, a.point) - distortion(opt, a.point);
                    m1 += a.weight * dl;
                    m2 += a.weight * dl * dl;
                }
                p.excess = m1;
                p.second_moment = m2;
                break;
            }
            case RiskOracle::Mode::ClosedFormK1: {
                const auto cf = k1_closed_form_moments(spec, cb);
                p.excess = cf.excess;
                p.second_moment = cf.second_moment;
                break;
            }
            case RiskOracle::Mode::MonteCarlo: {
                if (!oracle.oracle_sample) bad_param("probe: MonteCarlo oracle has no sample");
                const auto& s = *oracle.oracle_sample;
                std::vector<double> dl(s.n), dl2(s.n);
                for (std::size_t i = 0; i < s.n; ++i) {
                    const double v = distortion(cb, s.point(i)) - distortion(opt, s.point(i));
                    dl[i] = v;
                    dl2[i] = v * v;
                }
                const auto mv1 = mean_variance(dl);
                const auto mv2 = mean_variance(dl2);
                p.excess = mv1.mean;
                p.second_moment = mv2.mean;
                p.se_excess = mv1.se_mean();
                p.se_second = mv2.se_mean();
                break;
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

double default_tau(const RiskOracle& oracle) { return oracle.optimum_risk; }

BernsteinFit fit_multiscale(const std::vector<HypothesisProbe>& probes, double tau) {
    BernsteinFit fit;
    fit.tau = tau;

    const auto fit_region = [&](const std::string& name, auto in_region) {
        std::vector<double> lx, ly;
        std::size_t dropped = 0;
        for (const auto& p : probes) {
            if (!in_region(p)) continue;
            if (p.excess <= 0.0 || p.second_moment <= 0.0) {
                ++dropped;
                continue;
            }
            lx.push_back(std::log(p.excess));
            ly.push_back(std::log(p.second_moment));
        }
        if (lx.empty() && dropped == 0) return;  // region empty: no piece
        BernsteinRegionFit region;
        region.region = name;
        region.count = lx.size();
        region.dropped_zero_excess = dropped;
        if (lx.size() < 2)
            throw std::invalid_argument("fit_multiscale: region '" + name +
                                        "' has fewer than 2 usable probes");
        const auto ols = ols_fit(lx, ly);
        region.gamma_hat = ols.slope;
        region.gamma_se = ols.se_slope;
        if (region.gamma_hat > 1.0) {
            region.gamma_hat = 1.0;
            region.gamma_clipped = true;
        } else if (region.gamma_hat <= 0.0) {
            region.gamma_hat = 1e-6;
            region.gamma_clipped = true;
        }
        double max_resid = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < lx.size(); ++i)
            max_resid = std::max(max_resid, ly[i] - region.gamma_hat * lx[i]);
        region.b_hat = std::exp(max_resid);
        region.satisfied = !region.gamma_clipped;
        fit.pieces.push_back(std::move(region));
    };

    fit_region("near", [&](const HypothesisProbe& p) { return p.excess <= tau; });
    fit_region("far", [&](const HypothesisProbe& p) { return p.excess > tau; });
    if (fit.pieces.empty()) throw std::invalid_argument("fit_multiscale: no probes given");
    return fit;
}

std::vector<ProbeViolation> check_condition(const std::vector<HypothesisProbe>& probes,
                                            const BernsteinProfile& profile, double tau) {
    validate(profile);
    const auto piece_for = [&](const HypothesisProbe& p) -> const BernsteinPiece& {
        if (profile.pieces.size() == 1) return profile.pieces.front();
        const std::string want = p.excess <= tau ? "near" : "far";
        for (const auto& piece : profile.pieces)
            if (piece.label == want) return piece;
        throw std::invalid_argument("check_condition: profile pieces not aligned to regions");
    };

    std::vector<ProbeViolation> violations;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& p = probes[i];
        const auto& piece = piece_for(p);
        double allowed;
        if (p.excess <= 0.0) {
            allowed = 3.0 * p.se_second;
        } else {
            const double envelope = piece.b * std::pow(p.excess, piece.gamma);
            const double dslope = piece.b * piece.gamma * std::pow(p.excess, piece.gamma - 1.0);
            const double se = std::sqrt(p.se_second * p.se_second +
                                        dslope * dslope * p.se_excess * p.se_excess);
            allowed = envelope + 3.0 * se;
        }
        // 1e-12 relative slack: exact-oracle probes can sit on the envelope.
        if (p.second_moment > allowed * (1.0 + 1e-12))
            violations.push_back({i, p.second_moment, allowed});
    }
    return violations;
}

std::vector<Codebook> make_probe_codebooks(const RiskOracle& oracle, int k, int d, double rho,
                                           std::size_t count, uint64_t seed) {
    if (oracle.optima.empty()) bad_param("make_probe_codebooks: oracle carries no optima");
    std::vector<Codebook> probes;
    probes.reserve(count);
    const std::size_t ray_count = count / 2;
    const auto dk = static_cast<std::size_t>(d) * static_cast<std::size_t>(k);

    // Geometric distance ladder from 1e-3 * rho to ~rho.
    const double lo = 1e-3 * rho, hi = rho;
    for (std::size_t i = 0; i < ray_count; ++i) {
        Draw draw(mix_seed(seed, 0x726179), i);
        const auto& base = oracle.optima[i % oracle.optima.size()];
        std::vector<double> dir(dk);
        double norm2 = 0.0;
        for (auto& v : dir) {
            v = standard_normal_quantile(draw.u01_open());
            norm2 += v * v;
        }
        const double norm = std::sqrt(norm2);
        const double frac = ray_count > 1 ? static_cast<double>(i) / (ray_count - 1) : 0.0;
        const double dist = lo * std::pow(hi / lo, frac);
        Codebook cb = base;
        cb.rho = rho;
        for (std::size_t j = 0; j < dk; ++j)
            cb.centers[j] = clip_to_box(base.centers[j] + dist * dir[j] / norm, rho);
        probes.push_back(std::move(cb));
    }
    for (std::size_t i = ray_count; i < count; ++i)
        probes.push_back(random_codebook(k, d, rho, mix_seed(seed, 0x756E69), i));
    return probes;
}

}  // namespace ratelab
