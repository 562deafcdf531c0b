#include "ratelab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ratelab/math.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/serialization.hpp"

namespace ratelab {

namespace {

[[noreturn]] void bad_param(const std::string& msg) { throw std::invalid_argument(msg); }

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

std::vector<std::string> validate(const ExperimentConfig& config) {
    validate(config.spec);
    if (config.schema != 1) bad_param("config: unsupported schema");
    if (config.k < 1) bad_param("config: k must be >= 1");
    if (config.d != config.spec.dim) bad_param("config: d must match spec dim");
    if (!(config.rho > 0.0)) bad_param("config: rho must be > 0");
    if (config.n_grid.empty()) bad_param("config: n_grid must be nonempty");
    for (std::size_t i = 0; i + 1 < config.n_grid.size(); ++i)
        if (config.n_grid[i] >= config.n_grid[i + 1])
            bad_param("config: n_grid must be strictly increasing");
    if (config.trials < 1) bad_param("config: trials must be >= 1");
    if (config.fit_window < 1) bad_param("config: fit_window must be >= 1");
    if (config.oracle.mode == RiskOracle::Mode::ClosedFormK1 && config.k != 1)
        bad_param("config: closed_form_k1 oracle requires k = 1");

    std::vector<std::string> warnings;
    const double threshold = max_finite_moment_order(config.spec);
    if (config.r_assumed >= threshold)
        warnings.push_back("r_assumed = " + fmt17(config.r_assumed) +
                           " is at or beyond the source law's finite-moment order " + fmt17(threshold) +
                           "; theory comparison runs outside its hypotheses");
    if (config.erm_strategy == ErmStrategy::LloydMultistart)
        warnings.push_back(
            "LloydMultistart can return local optima; per-trial excess risk is an upper bound");
    return warnings;
}

uint64_t trial_seed(uint64_t base_seed, std::size_t n, std::size_t trial) {
    return mix_seed(mix_seed(base_seed, n), trial);
}

RunResult run(const ExperimentConfig& config) {
    RunResult result;
    result.warnings = validate(config);

    const RiskOracle oracle = make_oracle(config.spec, config.k, config.rho, config.oracle);

    const std::size_t jobs = config.n_grid.size() * config.trials;
    result.raw.resize(jobs);

    ErmOptions erm_options;
    erm_options.restarts = config.lloyd_restarts;

    const auto run_job = [&](std::size_t job) {
        const std::size_t n = config.n_grid[job / config.trials];
        const std::size_t trial = job % config.trials;
        TrialRecord rec;
        rec.n = n;
        rec.trial = trial;
        rec.seed = trial_seed(config.base_seed, n, trial);
        try {
            const Sample s = sample(config.spec, n, rec.seed);
            const Codebook cb = erm(s, config.k, config.rho, config.erm_strategy, erm_options);
            const ExcessRisk ex = excess_risk(cb, config.spec, oracle);
            rec.excess = ex.value;
            rec.clipped = ex.clipped;
        } catch (const std::exception& e) {
            rec.status = e.what();
            rec.excess = std::numeric_limits<double>::quiet_NaN();
        }
        result.raw[job] = std::move(rec);
    };

    int threads = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp<int>(threads, 1, static_cast<int>(jobs));
    if (threads <= 1) {
        for (std::size_t job = 0; job < jobs; ++job) run_job(job);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t job = next.fetch_add(1); job < jobs; job = next.fetch_add(1))
                    run_job(job);
            });
        for (auto& t : pool) t.join();
    }
    // Jobs land in preallocated (n, trial) slots, so the table is already in
    // canonical order regardless of scheduling.

    if (!config.output_dir.empty()) {
        std::filesystem::create_directories(config.output_dir);
        write_raw_csv(result.raw, config.output_dir + "/raw.csv");
    }

    RateCurve& curve = result.curve;
    curve.config = config;
    std::vector<std::pair<std::size_t, double>> medians;
    for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
        CurvePoint point;
        point.n = config.n_grid[gi];
        std::vector<double> ok;
        std::size_t clipped = 0;
        for (std::size_t t = 0; t < config.trials; ++t) {
            const auto& rec = result.raw[gi * config.trials + t];
            if (rec.status != "ok") continue;
            ok.push_back(rec.excess);
            if (rec.clipped) ++clipped;
        }
        point.trials_ok = ok.size();
        if (!ok.empty()) {
            std::sort(ok.begin(), ok.end());
            point.median = quantile_sorted(ok, 0.5);
            point.q90 = quantile_sorted(ok, 0.9);
            point.mean = pairwise_mean(ok);
            point.clip_rate = static_cast<double>(clipped) / static_cast<double>(ok.size());
        }
        medians.push_back({point.n, point.median});
        curve.points.push_back(point);
    }

    try {
        curve.fit = fit_rate(medians, config.fit_window);
    } catch (const std::exception& e) {
        curve.fit.valid = false;
        curve.fit.diagnostic = e.what();
    }
    curve.theory = kmeans_rate(config.r_assumed, config.k, config.d);

    if (!config.output_dir.empty()) {
        emit_csv(curve, config.output_dir + "/curve.csv");
        emit_json(curve, config.output_dir + "/curve.json");
        emit_svg(curve, config.output_dir + "/curve.svg");
    }
    return result;
}

RateFit fit_rate(const std::vector<std::pair<std::size_t, double>>& medians, int window) {
    RateFit fit;
    std::vector<std::pair<std::size_t, double>> usable;
    std::size_t dropped = 0;
    for (const auto& [n, median] : medians) {
        if (median > 0.0)
            usable.push_back({n, median});
        else
            ++dropped;
    }
    if (dropped > 0)
        fit.diagnostic = std::to_string(dropped) + " grid point(s) with zero median excluded; ";
    if (usable.size() < 3) {
        fit.valid = false;
        fit.diagnostic += "need at least 3 positive medians to fit a rate";
        return fit;
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(window), usable.size());
    std::vector<double> lx, ly;
    for (std::size_t i = usable.size() - take; i < usable.size(); ++i) {
        fit.window_n.push_back(usable[i].first);
        lx.push_back(std::log(static_cast<double>(usable[i].first)));
        ly.push_back(std::log(usable[i].second));
    }
    if (lx.size() < 3) {
        fit.valid = false;
        fit.diagnostic += "fit window smaller than 3 points";
        return fit;
    }
    const auto ols = ols_fit(lx, ly);
    fit.beta_hat = -ols.slope;
    fit.se = ols.se_slope;
    fit.valid = true;
    return fit;
}

TheoryComparison compare_theory(const RateCurve& curve) {
    if (!curve.fit.valid)
        throw std::invalid_argument("compare_theory: curve has no valid rate fit (" +
                                    curve.fit.diagnostic + ")");
    TheoryComparison cmp;
    cmp.beta_hat = curve.fit.beta_hat;
    cmp.se = curve.fit.se;
    std::ostringstream oss;
    if (curve.theory.empty) {
        cmp.verdict = Verdict::Vacuous;
        cmp.beta_theory = 0.0;
        oss << "VACUOUS: no guaranteed rate (" << curve.theory.diagnostic << ")";
    } else {
        cmp.beta_theory = curve.theory.beta_max;
        cmp.margin = cmp.beta_hat + 2.0 * cmp.se - cmp.beta_theory;
        cmp.verdict = cmp.margin >= 0.0 ? Verdict::Pass : Verdict::Fail;
        oss << (cmp.verdict == Verdict::Pass ? "PASS" : "FAIL") << ": beta_hat=" << cmp.beta_hat
            << " (se=" << cmp.se << ") vs guaranteed beta_max=" << cmp.beta_theory
            << ", margin=" << cmp.margin;
    }
    cmp.summary = oss.str();
    return cmp;
}

void write_raw_csv(const std::vector<TrialRecord>& raw, const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,trial,seed,excess,clipped,status\n";
    for (const auto& rec : raw) {
        std::string status = rec.status;
        std::replace(status.begin(), status.end(), ',', ';');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << rec.n << ',' << rec.trial << ',' << rec.seed << ',' << fmt17(rec.excess) << ','
            << (rec.clipped ? 1 : 0) << ',' << status << '\n';
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

std::vector<TrialRecord> read_raw_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<TrialRecord> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TrialRecord rec;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        rec.n = std::stoull(field);
        std::getline(ss, field, ',');
        rec.trial = std::stoull(field);
        std::getline(ss, field, ',');
        rec.seed = std::stoull(field);
        std::getline(ss, field, ',');
        rec.excess = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        rec.clipped = field == "1";
        std::getline(ss, rec.status);
        out.push_back(std::move(rec));
    }
    return out;
}

void emit_csv(const RateCurve& curve, const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,quantile,value,trials_ok,clip_rate\n";
    for (const auto& p : curve.points) {
        out << p.n << ",median," << fmt17(p.median) << ',' << p.trials_ok << ','
            << fmt17(p.clip_rate) << '\n';
        out << p.n << ",q90," << fmt17(p.q90) << ',' << p.trials_ok << ',' << fmt17(p.clip_rate)
            << '\n';
        out << p.n << ",mean," << fmt17(p.mean) << ',' << p.trials_ok << ',' << fmt17(p.clip_rate)
            << '\n';
    }
    if (!out) throw std::runtime_error("short write: " + path);
}

void emit_json(const RateCurve& curve, const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << to_json_string(curve, 2) << "\n";
    if (!out) throw std::runtime_error("short write: " + path);
}

void emit_svg(const RateCurve& curve, const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    constexpr double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
    std::vector<std::pair<double, double>> pts;  // (log10 n, log10 median)
    for (const auto& p : curve.points)
        if (p.median > 0.0) pts.push_back({std::log10(static_cast<double>(p.n)), std::log10(p.median)});

    double x0 = 0, x1 = 1, y0 = -1, y1 = 0;
    if (!pts.empty()) {
        x0 = pts.front().first;
        x1 = pts.back().first;
        y0 = y1 = pts.front().second;
        for (const auto& [x, y] : pts) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        if (x1 - x0 < 1e-9) x1 = x0 + 1;
        const double pad = std::max(0.2, 0.1 * (y1 - y0));
        y0 -= pad;
        y1 += pad;
    }
    const auto X = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (w - ml - mr); };
    const auto Y = [&](double ly) { return h - mb - (ly - y0) / (y1 - y0) * (h - mt - mb); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
        << h - mb << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << (w / 2) << "\" y=\"" << h - 12
        << "\" text-anchor=\"middle\" font-size=\"14\">log10 n</text>\n";
    out << "  <text x=\"16\" y=\"" << (h / 2)
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << (h / 2)
        << ")\">log10 median excess risk</text>\n";

    std::ostringstream emp;
    for (const auto& [lx, ly] : pts) emp << X(lx) << ',' << Y(ly) << ' ';
    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\""
        << emp.str() << "\"/>\n";

    // Guaranteed-slope reference line anchored at the first plotted point.
    std::ostringstream theo;
    if (!pts.empty()) {
        const double slope = curve.theory.empty ? 0.0 : -curve.theory.beta_max;
        const double ax = pts.front().first, ay = pts.front().second;
        theo << X(ax) << ',' << Y(ay) << ' ' << X(x1) << ',' << Y(ay + slope * (x1 - ax));
    }
    out << "  <polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 4\" points=\""
        << theo.str() << "\"/>\n";
    out << "  <text x=\"" << w - mr - 6 << "\" y=\"" << mt + 16
        << "\" text-anchor=\"end\" font-size=\"13\">"
        << (curve.theory.empty ? std::string("no guaranteed rate")
                               : "guaranteed slope -" + fmt17(curve.theory.beta_max))
        << "</text>\n";
    out << "</svg>\n";
    if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace ratelab
