#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ratelab/bounds.hpp"
#include "ratelab/quantization.hpp"

namespace ratelab {

// A reproducible rate experiment: trial (n, t) draws its sample with seed
// h(base_seed, n, t), solves the ERM, and scores excess risk against one
// shared oracle. Identical configs give byte-identical raw tables at any
// thread count.
struct ExperimentConfig {
    int schema = 1;
    std::string name = "experiment";
    DistributionSpec spec;
    int k = 1;
    int d = 1;
    double rho = 1.0;
    std::vector<std::size_t> n_grid;
    std::size_t trials = 1;
    uint64_t base_seed = 1;
    ErmStrategy erm_strategy = ErmStrategy::Exact1D;
    int lloyd_restarts = 32;
    OracleConfig oracle;
    double r_assumed = 4.0;
    int fit_window = 3;
    std::string output_dir;  // empty: keep results in memory only
    int threads = 0;         // 0: hardware concurrency
};

// Throws on malformed configs; returns non-fatal warnings (e.g. r_assumed
// beyond the source law's finite moments, which is allowed for what-breaks runs).
std::vector<std::string> validate(const ExperimentConfig& config);

uint64_t trial_seed(uint64_t base_seed, std::size_t n, std::size_t trial);

struct TrialRecord {
    std::size_t n = 0;
    std::size_t trial = 0;
    uint64_t seed = 0;
    double excess = 0.0;
    bool clipped = false;
    std::string status = "ok";  // anything else: solver failure, excluded from quantiles
};

struct CurvePoint {
    std::size_t n = 0;
    double median = 0.0;
    double q90 = 0.0;  // the delta = 0.1 high-probability curve
    double mean = 0.0;
    std::size_t trials_ok = 0;
    double clip_rate = 0.0;
};

struct RateFit {
    double beta_hat = 0.0;
    double se = 0.0;
    std::vector<std::size_t> window_n;
    bool valid = false;
    std::string diagnostic;
};

struct RateCurve {
    ExperimentConfig config;
    std::vector<CurvePoint> points;
    RateFit fit;
    BetaInterval theory;  // kmeans_rate(r_assumed, k, d)
};

struct RunResult {
    RateCurve curve;
    std::vector<TrialRecord> raw;  // sorted by (n, trial)
    std::vector<std::string> warnings;
};

RunResult run(const ExperimentConfig& config);

// Least-squares slope of log(median excess) on log(n), negated, over the
// largest `window` grid points with positive medians. Zero medians are
// excluded with a diagnostic; fewer than 3 usable points invalidates the fit.
RateFit fit_rate(const std::vector<std::pair<std::size_t, double>>& medians, int window);

enum class Verdict { Pass, Fail, Vacuous };

inline int verdict_exit_code(Verdict v) {
    switch (v) {
        case Verdict::Pass: return 0;
        case Verdict::Fail: return 2;
        case Verdict::Vacuous: return 3;
    }
    return 3;
}

// The guarantee upper-bounds excess risk, so the fitted decay must be at
// least as fast: PASS iff beta_hat + 2 se >= beta_max.
struct TheoryComparison {
    Verdict verdict = Verdict::Vacuous;
    double beta_hat = 0.0;
    double se = 0.0;
    double beta_theory = 0.0;
    double margin = 0.0;  // beta_hat + 2 se - beta_theory
    std::string summary;
};

TheoryComparison compare_theory(const RateCurve& curve);

// Persistence: raw trial table and curve in CSV/JSON/SVG. Numbers are written
// with 17 significant digits. The SVG is a log-log plot with exactly two
// polylines (empirical medians, guaranteed slope).
void write_raw_csv(const std::vector<TrialRecord>& raw, const std::string& path);
std::vector<TrialRecord> read_raw_csv(const std::string& path);
void emit_csv(const RateCurve& curve, const std::string& path);
void emit_svg(const RateCurve& curve, const std::string& path);
void emit_json(const RateCurve& curve, const std::string& path);  // see serialization.hpp

}  // namespace ratelab
