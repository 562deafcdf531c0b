#include "ratelab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ratelab/math.hpp"

namespace ratelab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_param(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

void validate(const BoundParams& p) {
    if (!(p.r >= 2.0)) bad_param("BoundParams: r must be >= 2");
    if (!(p.c_entropy >= 1.0)) bad_param("BoundParams: c_entropy must be >= 1");
    if (!(p.k_entropy >= 1.0)) bad_param("BoundParams: k_entropy must be >= 1");
    if (!(p.r >= p.c_entropy + 1.0)) bad_param("BoundParams: requires r >= c_entropy + 1");
    if (!(p.w_envelope > 0.0)) bad_param("BoundParams: w_envelope must be > 0");
    if (!(p.rho > 0.0)) bad_param("BoundParams: rho must be > 0");
    if (!(p.delta > 0.0 && p.delta < 1.0)) bad_param("BoundParams: delta must be in (0,1)");
    if (!(p.n > 0.0)) bad_param("BoundParams: n must be > 0");
}

void validate(const BernsteinProfile& profile) {
    if (profile.pieces.empty()) bad_param("BernsteinProfile: needs at least one piece");
    for (const auto& piece : profile.pieces) {
        if (!(piece.b > 0.0)) bad_param("BernsteinProfile: B must be > 0");
        if (!(piece.gamma > 0.0 && piece.gamma <= 1.0))
            bad_param("BernsteinProfile: gamma must be in (0,1]");
    }
}

double exponent_a(double l, double r, double c_entropy, double beta, double alpha) {
    if (!(l > 0.0)) bad_param("exponent_a: l must be > 0");
    if (!(beta > 0.0 && beta <= 1.0)) bad_param("exponent_a: beta must be in (0,1]");
    if (!(alpha > 0.0)) bad_param("exponent_a: alpha must be > 0");
    const double first = l * l / r - (1.0 - beta) * l + beta * c_entropy;
    const double second = (beta * (1.0 - 0.5 * alpha) - 0.5) * l + beta * c_entropy;
    return std::max(first, second);
}

BetaInterval admissible_beta(double r, double c_entropy, double alpha) {
    BetaInterval out;
    out.r = r;
    if (!(r > 0.0 && c_entropy >= 1.0 && alpha > 0.0))
        bad_param("admissible_beta: invalid arguments");
    if (r < 4.0 * c_entropy) {
        out.empty = true;
        out.diagnostic = "empty interval: requires r >= 4*c_entropy";
        return out;
    }
    const double core = 1.0 - 2.0 * std::sqrt(c_entropy / r);
    out.beta_max = alpha >= 1.0 ? core : core / (2.0 - alpha);
    out.empty = !(out.beta_max > 0.0);
    if (out.empty) out.diagnostic = "degenerate interval: r == 4*c_entropy";
    return out;
}

TailBound lederer_tail(double n, double r, double m_envelope, double sigma, double zeta,
                       double x, std::optional<double> constant_override) {
    if (!(n > 0.0) || !(r >= 1.0) || !(zeta > 0.0) || !(x > 0.0))
        bad_param("lederer_tail: n, r, zeta, x must be positive and r >= 1");
    if (m_envelope < 0.0 || sigma < 0.0)
        bad_param("lederer_tail: m_envelope and sigma must be nonnegative");
    if (m_envelope == 0.0 && sigma == 0.0) return {0.0, 1.0};

    const double c = constant_override.value_or(64.0 / zeta + zeta + 7.0);
    const double log_x = std::log(x);
    // log of the l-th candidate; the whole minimization runs in log space.
    const auto log_candidate = [&](double l) {
        const double term = c * std::pow(l / n, 1.0 - l / r) * m_envelope +
                            4.0 * sigma * std::sqrt(l / n);
        if (term <= 0.0) return -kInf;
        return l * (std::log(term) - log_x);
    };

    double best_log = kInf, best_l = 1.0;
    const auto consider = [&](double l) {
        const double v = log_candidate(l);
        if (v < best_log) {
            best_log = v;
            best_l = l;
        }
    };
    constexpr int kGridPoints = 512;
    for (int i = 0; i < kGridPoints; ++i)
        consider(1.0 + (r - 1.0) * static_cast<double>(i) / (kGridPoints - 1));
    for (double l = 1.0; l <= r; l += 1.0) consider(l);
    consider(r);

    TailBound out;
    out.argmin_l = best_l;
    out.bound = std::exp(best_log);  // may overflow to +inf: vacuous bound
    return out;
}

HolderCheck reverse_holder_check(std::span<const double> values, double r,
                                 std::span<const double> weights) {
    if (!(r > 2.0)) bad_param("reverse_holder_check: r must be > 2");
    if (values.empty()) bad_param("reverse_holder_check: empty sample");
    if (!weights.empty() && weights.size() != values.size())
        bad_param("reverse_holder_check: weight/value size mismatch");

    double total = 0.0, m1 = 0.0, m2 = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = values[i];
        if (u < 0.0) bad_param("reverse_holder_check: values must be nonnegative");
        const double w = weights.empty() ? 1.0 : weights[i];
        if (w < 0.0) bad_param("reverse_holder_check: weights must be nonnegative");
        total += w;
        m1 += w * u;
        m2 += w * u * u;
        mr += w * std::pow(u, r);
    }
    if (!(total > 0.0)) bad_param("reverse_holder_check: weights sum to zero");
    m1 /= total;
    m2 /= total;
    mr /= total;

    HolderCheck out;
    out.lhs = std::sqrt(m2);
    const double l1 = m1;
    const double lr = std::pow(mr, 1.0 / r);
    out.rhs = std::pow(l1, (r - 2.0) / (2.0 * r - 2.0)) * std::pow(lr, r / (2.0 * r - 2.0));
    out.holds = out.lhs <= out.rhs + 1e-12;
    return out;
}

ImplicitBoundConstants implicit_bound_constants(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) bad_param("implicit_bound: nu must be in (0,1)");
    ImplicitBoundConstants c;
    c.c1 = 2.0 * (1.0 - nu) * std::pow(2.0 * nu, nu / (1.0 - nu));
    c.c2 = 2.0;
    return c;
}

double implicit_bound(double a, double b, double nu) {
    if (a < 0.0 || b < 0.0) bad_param("implicit_bound: a and b must be nonnegative");
    const auto c = implicit_bound_constants(nu);
    return c.c1 * std::pow(a, 1.0 / (1.0 - nu)) + c.c2 * b;
}

BetaInterval guaranteed_rate(const BoundParams& params, const BernsteinProfile& profile) {
    validate(params);
    validate(profile);
    BetaInterval out;
    out.r = params.r;
    out.beta_max = kInf;
    for (const auto& piece : profile.pieces) {
        const auto interval = admissible_beta(params.r, params.c_entropy, piece.gamma);
        if (interval.empty) return interval;
        out.beta_max = std::min(out.beta_max, interval.beta_max);
    }
    out.empty = false;
    return out;
}

BetaInterval kmeans_rate(double r, int k, int d) {
    if (k < 1 || d < 1) bad_param("kmeans_rate: k and d must be >= 1");
    if (!(r > 1.0)) bad_param("kmeans_rate: r must be > 1");
    const double c = static_cast<double>(k) * (d + 1);
    BetaInterval out;
    out.r = r;
    if (r < 4.0 * c) {
        out.empty = true;
        out.diagnostic = "empty interval: requires r >= 4*k*(d+1)";
        return out;
    }
    out.beta_max = (r - 1.0) / r * (1.0 - 2.0 * std::sqrt(c / r));
    out.empty = !(out.beta_max > 0.0);
    if (out.empty) out.diagnostic = "degenerate interval: r == 4*k*(d+1)";
    return out;
}

FarFieldBernstein far_field_bernstein(double w_envelope, double r, double alpha) {
    if (!(w_envelope > 0.0)) bad_param("far_field_bernstein: W must be > 0");
    if (!(r > 2.0)) bad_param("far_field_bernstein: r must be > 2");
    FarFieldBernstein out;
    out.m_threshold = std::pow(w_envelope, r / (r - 2.0));
    if (!(alpha > out.m_threshold))
        throw std::invalid_argument("far_field_bernstein: alpha must exceed W^(r/(r-2))");
    out.gamma = (r - 2.0) / (r - 1.0);
    out.b = 2.0 * std::pow(alpha, out.gamma);
    out.threshold_ratio = alpha / (alpha - out.m_threshold);
    return out;
}

}  // namespace ratelab
