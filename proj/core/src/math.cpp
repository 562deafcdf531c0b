#include "ratelab/math.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratelab {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double MeanVar::se_mean() const {
    return n >= 2 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

MeanVar mean_variance(std::span<const double> values) {
    MeanVar out;
    out.n = values.size();
    if (out.n == 0) return out;
    out.mean = pairwise_mean(values);
    if (out.n < 2) return out;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - out.mean;
        sq[i] = d * d;
    }
    out.variance = pairwise_sum(sq) / static_cast<double>(out.n - 1);
    return out;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols_fit: size mismatch");
    LinearFit fit;
    fit.n = x.size();
    if (fit.n < 2) throw std::invalid_argument("ols_fit: need at least 2 points");
    const double xbar = pairwise_mean(x);
    const double ybar = pairwise_mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar, dy = y[i] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae (all x equal)");
    fit.slope = sxy / sxx;
    fit.intercept = ybar - fit.slope * xbar;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    if (fit.n > 2) {
        fit.se_slope = std::sqrt(std::max(0.0, rss / static_cast<double>(fit.n - 2)) / sxx);
    }
    return fit;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const std::size_t n = sorted.size();
    if (p == 0.5) {
        if (n % 2 == 1) return sorted[n / 2];
        return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    std::size_t rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

QuantileBracket quantile_bracket(std::span<const double> sorted, double p, double z) {
    if (sorted.empty()) throw std::invalid_argument("quantile bracket of empty sample");
    const double n = static_cast<double>(sorted.size());
    const double spread = z * std::sqrt(n * p * (1.0 - p));
    const auto pick = [&](double rank) {
        const auto idx = static_cast<long long>(std::llround(rank));
        const long long clamped = std::clamp<long long>(idx, 1, static_cast<long long>(sorted.size()));
        return sorted[static_cast<std::size_t>(clamped - 1)];
    };
    return {pick(p * n - spread), pick(p * n + spread)};
}

}  // namespace ratelab
