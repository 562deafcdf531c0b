// Acceptance suite: every shipped guarantee, one pass/fail line per criterion.
// Run all criteria with no arguments, or one with --criterion N.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "ratelab/bernstein.hpp"
#include "ratelab/bounds.hpp"
#include "ratelab/experiments.hpp"
#include "ratelab/math.hpp"
#include "ratelab/nets.hpp"
#include "ratelab/rng.hpp"
#include "ratelab/serialization.hpp"

#ifndef RATELAB_SOURCE_DIR
#define RATELAB_SOURCE_DIR "."
#endif

using namespace ratelab;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& msg) {
        if (!cond) {
            ok = false;
            detail << " [FAIL: " << msg << "]";
        }
    }
    template <typename T>
    void note(const std::string& label, T value) {
        detail << " " << label << "=" << value;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_path(const std::string& name) {
    return std::string(RATELAB_SOURCE_DIR) + "/configs/" + name;
}

// Deterministic parallel fill: out[i] = fn(i), scheduled over fixed chunks so
// the result is identical at any thread count.
void parallel_fill(std::vector<double>& out, const std::function<double(std::size_t)>& fn) {
    const std::size_t chunk = 4096;
    const std::size_t chunks = (out.size() + chunk - 1) / chunk;
    std::atomic<std::size_t> next{0};
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t ci = next.fetch_add(1); ci < chunks; ci = next.fetch_add(1)) {
                const std::size_t lo = ci * chunk, hi = std::min(out.size(), lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

// ---- criterion 1: exponent-function suite --------------------------------

Check criterion1() {
    Check c;
    // Hand-derived values to 1e-12.
    c.require(std::abs(exponent_a(24.0, 64.0, 4.0, 0.25, 1.0) - (-8.0)) < 1e-12,
              "exponent_a(24,64,4,0.25,1) != -8");
    c.require(std::abs(exponent_a(19.2, 64.0, 4.0, 0.4, 2.0) - (-4.16)) < 1e-12,
              "exponent_a(19.2,64,4,0.4,2) != -4.16");

    Draw draw(0xAC5E97, 0);
    std::size_t failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double c_entropy = 1.0 + 7.0 * draw.u01();
        const double r = 4.0 * c_entropy * (1.01 + 7.0 * draw.u01());
        // Both exponent regimes: alpha = gamma in (0,1] and alpha = 2.
        const double alpha = (trial % 2 == 0) ? draw.u01_open_below() : 2.0;
        const auto interval = admissible_beta(r, c_entropy, alpha);
        if (interval.empty) {
            ++failures;
            continue;
        }
        const double beta = interval.beta_max * (1e-6 + (1.0 - 2e-6) * draw.u01());
        const double l = interval.witness_l(beta);
        if (!(l >= 1.0 && l <= r) || !(exponent_a(l, r, c_entropy, beta, alpha) < 0.0)) ++failures;
    }
    c.require(failures == 0, std::to_string(failures) + " exponent witnesses failed");
    c.note("tuples", 10000);
    return c;
}

// ---- criterion 2: inequality suites --------------------------------------

double largest_fixed_point(double a, double b, double nu) {
    if (a == 0.0) return b;
    const auto g = [&](double x) { return a * std::pow(x, nu) + b - x; };
    double hi = std::max({2.0 * b, std::pow(2.0 * a, 1.0 / (1.0 - nu)), 1.0});
    while (g(hi) > 0.0) hi *= 2.0;
    double lo = b > 0.0 ? 0.0 : 1e-300;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

Check criterion2() {
    Check c;
    Draw draw(0x1E4, 0);
    std::size_t holder_failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + draw.below(64);
        std::vector<double> values(n), weights(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = std::pow(draw.u01_open_below(), -1.0 / 2.5) - 0.9;  // heavy, >= 0.1
            weights[i] = draw.u01_open_below();
        }
        const double r = 2.0 + 62.0 * draw.u01_open_below();
        const auto check = reverse_holder_check(values, r, weights);
        if (check.lhs > check.rhs + 1e-12) ++holder_failures;
    }
    c.require(holder_failures == 0,
              std::to_string(holder_failures) + " reverse-Holder violations");

    std::size_t implicit_failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double a = 10.0 * draw.u01();
        const double b = 10.0 * draw.u01();
        const double nu = 0.05 + 0.9 * draw.u01();
        const double xstar = largest_fixed_point(a, b, nu);
        if (xstar > implicit_bound(a, b, nu) * (1.0 + 1e-10) + 1e-12) ++implicit_failures;
    }
    c.require(implicit_failures == 0,
              std::to_string(implicit_failures) + " implicit-bound violations");
    c.note("cases_each", 10000);
    return c;
}

// ---- criterion 3: Lederer dominance ---------------------------------------

Check criterion3() {
    Check c;
    struct Family {
        std::string name;
        DistributionSpec spec;
    };
    const std::vector<Family> families{
        {"pareto_a5", {Pareto{5.0, 1.0}, 1}},
        {"student_t6", {StudentT{6.0, 1.0}, 1}},
        {"lognormal", {Lognormal{0.0, 1.0}, 1}},
    };
    constexpr double r = 4.0;
    constexpr std::size_t kFamilySize = 8;  // |K| <= 8 nonnegative functions
    constexpr std::size_t kSampleN = 64;    // n inside each replicate
    constexpr std::size_t kOracleReps = 1000000;
    constexpr std::size_t kTestReps = 100000;

    std::vector<double> centers(kFamilySize);
    for (std::size_t j = 0; j < kFamilySize; ++j)
        centers[j] = -2.0 + 4.0 * static_cast<double>(j) / (kFamilySize - 1);

    for (const auto& fam : families) {
        // V_j(x) = |x - c_j|; E V_j^r finite since E|X|^4 is (a=5, nu=6, lognormal).
        const double mean = mean_vector(fam.spec)[0];
        const double m2 = moment(fam.spec, 2.0);
        double sigma2 = 0.0;
        for (double cj : centers) sigma2 = std::max(sigma2, m2 - 2.0 * cj * mean + cj * cj);
        // (E sup_j V_j^4)^(1/4) <= (E (|X|+2)^4)^(1/4), expanded binomially.
        double m_env4 = 0.0;
        const double binom[5] = {1, 4, 6, 4, 1};
        for (int p = 0; p <= 4; ++p) {
            const double absmom = p == 0 ? 1.0 : moment(fam.spec, static_cast<double>(p));
            m_env4 += binom[p] * absmom * std::pow(2.0, 4 - p);
        }
        const double m_env = std::pow(m_env4, 0.25);

        const uint64_t fam_seed = mix_seed(0x1EDE7E7, std::hash<std::string>{}(fam.name));
        const auto replicate_v = [&](uint64_t key, std::size_t rep) {
            double buf[kSampleN];
            sample_into(fam.spec, mix_seed(key, rep), 0, kSampleN,
                        std::span<double>(buf, kSampleN));
            double sums[kFamilySize] = {0};
            for (double x : buf)
                for (std::size_t j = 0; j < kFamilySize; ++j)
                    sums[j] += std::abs(x - centers[j]);
            double v = 0.0;
            for (double s : sums) v = std::max(v, s / static_cast<double>(kSampleN));
            return v;
        };

        // E V from the 10^6-replicate oracle.
        const uint64_t oracle_key = mix_seed(fam_seed, 1);
        std::vector<double> oracle_vs(kOracleReps);
        parallel_fill(oracle_vs, [&](std::size_t rep) { return replicate_v(oracle_key, rep); });
        const double ev = pairwise_mean(oracle_vs);
        oracle_vs.clear();
        oracle_vs.shrink_to_fit();

        // Fresh replicates for the tail frequencies.
        const uint64_t test_key = mix_seed(fam_seed, 2);
        std::vector<double> vs(kTestReps);
        parallel_fill(vs, [&](std::size_t rep) { return replicate_v(test_key, rep); });
        std::sort(vs.begin(), vs.end());

        for (const double zeta : {8.0, 0.25}) {
            for (int xi = 0; xi < 10; ++xi) {
                const double x = ev * 0.05 * std::pow(60.0, xi / 9.0);  // 0.05 EV .. 3 EV
                const double threshold = (1.0 + zeta) * ev + x;
                const auto first = std::lower_bound(vs.begin(), vs.end(), threshold);
                const double freq =
                    static_cast<double>(vs.end() - first) / static_cast<double>(kTestReps);
                const double bound =
                    lederer_tail(kSampleN, r, m_env, std::sqrt(sigma2), zeta, x).bound;
                const double se = std::sqrt(freq * (1.0 - freq) / static_cast<double>(kTestReps));
                if (!(freq <= bound + 3.0 * se)) {
                    c.require(false, fam.name + " zeta=" + std::to_string(zeta) +
                                         " x=" + std::to_string(x) + ": freq " +
                                         std::to_string(freq) + " > bound " +
                                         std::to_string(bound));
                }
            }
        }
        c.note(fam.name + "_EV", ev);
    }
    return c;
}

// ---- criterion 4: k = 1 exactness and rate -------------------------------

Check criterion4() {
    Check c;
    const ExperimentConfig config = config_from_json_string(slurp(config_path("k1_gaussian.json")));
    const RunResult result = run(config);

    std::size_t inexact = 0;
    for (const auto& rec : result.raw) {
        if (rec.status != "ok") {
            ++inexact;
            continue;
        }
        const Sample s = sample(config.spec, rec.n, rec.seed);
        long double acc = 0.0L;
        for (double x : s.data) acc += x;
        const double mean = static_cast<double>(acc / static_cast<long double>(rec.n));
        if (std::abs(rec.excess - mean * mean) >= 1e-12) ++inexact;
    }
    c.require(inexact == 0, std::to_string(inexact) + " trials deviate from (mean)^2 at 1e-12");

    c.require(result.curve.fit.valid, "rate fit invalid: " + result.curve.fit.diagnostic);
    c.require(result.curve.fit.beta_hat >= 0.9 && result.curve.fit.beta_hat <= 1.1,
              "beta_hat outside [0.9, 1.1]");
    // The source law of this config satisfies the rate guarantee's hypotheses, so
    // the verdict must be PASS as well.
    c.require(compare_theory(result.curve).verdict == Verdict::Pass,
              "reference config verdict is not PASS");
    c.note("beta_hat", result.curve.fit.beta_hat);
    c.note("se", result.curve.fit.se);
    return c;
}

// ---- criterion 5: heavy-tailed k-means rate -------------------------------

Check criterion5() {
    Check c;
    const ExperimentConfig config =
        config_from_json_string(slurp(config_path("kmeans_student_t.json")));
    const auto theory = kmeans_rate(config.r_assumed, config.k, config.d);
    c.require(!theory.empty, "theory interval unexpectedly empty");
    c.require(std::abs(theory.beta_max - (23.0 / 24.0) * (1.0 - 2.0 * std::sqrt(4.0 / 24.0))) <
                  1e-12,
              "kmeans_rate(24,2,1) mismatch with direct arithmetic");

    const RunResult result = run(config);
    c.require(result.curve.fit.valid, "rate fit invalid: " + result.curve.fit.diagnostic);
    const TheoryComparison cmp = compare_theory(result.curve);
    c.require(cmp.verdict == Verdict::Pass, "compare_theory verdict is not PASS: " + cmp.summary);
    c.note("beta_hat", cmp.beta_hat);
    c.note("se", cmp.se);
    c.note("beta_max", cmp.beta_theory);
    return c;
}

// ---- criterion 6: Bernstein verification ----------------------------------

Check criterion6() {
    Check c;
    const DistributionSpec gauss{Gaussian{0.0, 1.0}, 1};
    const double rho = 4.0;
    const RiskOracle mc = make_oracle(gauss, 1, rho, {RiskOracle::Mode::MonteCarlo, 200000, 1213});

    // 40 probes: 20 near (m in [1e-3, 0.1]) and 20 far (m in [1, 14]).
    std::vector<Codebook> codebooks;
    std::vector<double> ms;
    for (int i = 0; i < 20; ++i) ms.push_back(std::pow(10.0, -3.0 + 2.0 * i / 19.0));
    for (int i = 0; i < 20; ++i) ms.push_back(std::pow(10.0, 0.0 + std::log10(14.0) * i / 19.0));
    for (double m : ms) {
        Codebook cb;
        cb.k = 1;
        cb.d = 1;
        cb.rho = rho;
        cb.centers = {std::sqrt(m)};
        codebooks.push_back(cb);
    }
    const auto probes = probe(codebooks, gauss, mc);

    std::size_t off_closed_form = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto closed = k1_closed_form_moments(gauss, codebooks[i]);
        if (std::abs(probes[i].excess - closed.excess) > 5.0 * probes[i].se_excess)
            ++off_closed_form;
        if (std::abs(probes[i].second_moment - closed.second_moment) > 5.0 * probes[i].se_second)
            ++off_closed_form;
    }
    c.require(off_closed_form == 0,
              std::to_string(off_closed_form) + " probe moments beyond 5 SE of m^2 + 4 sigma^2 m");

    const BernsteinFit fit = fit_multiscale(probes, 0.1);
    const auto* near = &fit.pieces.front();
    c.require(near->region == "near" && near->count >= 20, "near region underpopulated");
    c.require(near->gamma_hat >= 0.9 && near->gamma_hat <= 1.1,
              "near gamma_hat outside [0.9, 1.1]");
    c.note("near_gamma_hat", near->gamma_hat);

    // Far field at (2 alpha^gamma, (r-2)/(r-1)) with alpha = 2M, via oracle moments.
    const double r = 4.0;
    const double w = envelope_bound(gauss, rho, r);
    const auto ff = far_field_bernstein(w, r, 2.0 * std::pow(w, r / (r - 2.0)));
    std::size_t far_violations = 0;
    for (double m : ms) {
        const double risk_ratio = (1.0 + m) / 1.0;  // R(c)/R(c*) for sigma = 1
        if (risk_ratio < ff.threshold_ratio) continue;
        Codebook cb;
        cb.k = 1;
        cb.d = 1;
        cb.rho = rho;
        cb.centers = {std::sqrt(m)};
        const auto closed = k1_closed_form_moments(gauss, cb);
        if (!(closed.second_moment <= ff.b * std::pow(closed.excess, ff.gamma)))
            ++far_violations;
    }
    c.require(far_violations == 0,
              std::to_string(far_violations) + " far-field probes violate the derived constants");
    c.note("far_B", ff.b);
    return c;
}

// ---- criterion 7: net suite ------------------------------------------------

Check criterion7() {
    Check c;
    // Member-count formula across a 50-configuration sweep.
    const double rhos[5] = {0.5, 1.0, 2.0, 3.3, 5.0};
    const double fracs[5] = {1.31, 0.617, 0.353, 0.201, 0.117};
    const int dks[2][2] = {{1, 1}, {1, 2}};
    std::size_t count_mismatches = 0;
    for (double rho : rhos)
        for (double frac : fracs)
            for (const auto& dk : dks) {
                const double mesh = rho * frac;
                const auto net = build_net_mesh(rho, dk[0], dk[1], mesh, 1.0);
                const auto cells =
                    static_cast<std::size_t>(std::ceil(2.0 * rho / mesh - 1e-12));
                std::size_t expect = 1;
                for (int t = 0; t < dk[0] * dk[1]; ++t) expect *= cells;
                if (net.member_count() != expect) ++count_mismatches;
            }
    c.require(count_mismatches == 0,
              std::to_string(count_mismatches) + " member-count mismatches in the sweep");

    // Projection distance bound, exact, on 1e4 random codebooks.
    const auto net = build_net_mesh(2.0, 1, 2, 0.37, 1.0);
    std::size_t proj_failures = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const Codebook cb = random_codebook(2, 1, 2.0, 0xB0B, trial);
        const Codebook proj = net.project(cb);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < cb.centers.size(); ++j) {
            const double diff = cb.centers[j] - proj.centers[j];
            dist2 += diff * diff;
        }
        if (!(std::sqrt(dist2) <= net.mesh() * std::sqrt(2.0) / 2.0 + 1e-12)) ++proj_failures;
    }
    c.require(proj_failures == 0, std::to_string(proj_failures) + " projection bound failures");

    // Empirical epsilon-certification on a bounded mixture, within 3 SE.
    const DistributionSpec mix{PointMassMixture{{{{-0.5}, 0.5}, {{0.5}, 0.5}}}, 1};
    const auto lip = estimate_loss_lipschitz(mix, 2, 1.0, 100, 20000, 3);
    const auto cert_net =
        build_net_mesh(1.0, 1, 2, 0.05, 2.0 * std::max(lip.l_hat, lip.max_ratio));
    const Sample s = sample(mix, 50000, 8);
    const double eps2 = cert_net.epsilon() * cert_net.epsilon();
    std::size_t cert_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Codebook cb = random_codebook(2, 1, 1.0, 21, trial);
        const Codebook proj = cert_net.project(cb);
        std::vector<double> sq(s.n);
        for (std::size_t i = 0; i < s.n; ++i) {
            const double diff = distortion(cb, s.point(i)) - distortion(proj, s.point(i));
            sq[i] = diff * diff;
        }
        const auto mv = mean_variance(sq);
        if (!(mv.mean <= eps2 + 3.0 * mv.se_mean())) ++cert_failures;
    }
    c.require(cert_failures == 0,
              std::to_string(cert_failures) + " epsilon-certification failures");
    c.note("l_hat", lip.l_hat);
    return c;
}

// ---- criterion 8: reproducibility across thread counts --------------------

Check criterion8() {
    Check c;
    const auto base = std::filesystem::temp_directory_path() / "ratelab_acceptance_c8";
    std::filesystem::remove_all(base);
    for (const std::string name : {"k1_gaussian.json", "kmeans_student_t.json", "two_atoms.json"}) {
        ExperimentConfig config = config_from_json_string(slurp(config_path(name)));
        config.threads = 1;
        config.output_dir = (base / (config.name + "-t1")).string();
        const RunResult serial = run(config);
        config.threads = 8;
        config.output_dir = (base / (config.name + "-t8")).string();
        run(config);
        const std::string raw1 = slurp((base / (config.name + "-t1") / "raw.csv").string());
        const std::string raw8 = slurp((base / (config.name + "-t8") / "raw.csv").string());
        c.require(!raw1.empty() && raw1 == raw8, config.name + ": raw CSVs differ across thread counts");
        c.note(config.name, raw1 == raw8 ? "identical" : "DIFFERS");

        // Median excess is nonincreasing in n up to order-statistic noise on
        // every shipped reference config.
        for (std::size_t i = 0; i + 1 < serial.curve.points.size(); ++i) {
            std::vector<double> v;
            for (const auto& rec : serial.raw)
                if (rec.n == serial.curve.points[i].n && rec.status == "ok")
                    v.push_back(rec.excess);
            std::sort(v.begin(), v.end());
            const auto bracket = quantile_bracket(v, 0.5, 3.0);
            c.require(serial.curve.points[i + 1].median <= bracket.hi,
                      config.name + ": median excess increased beyond 3 quantile-SE at n=" +
                          std::to_string(serial.curve.points[i + 1].n));
        }
    }
    std::filesystem::remove_all(base);
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Check()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (i < argc && std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[i + 1]);
    }

    const std::vector<Criterion> criteria{
        {1, "exponent-function suite", 5.0, criterion1},
        {2, "inequality suites", 10.0, criterion2},
        {3, "Lederer dominance", 300.0, criterion3},
        {4, "k=1 exactness and rate", 120.0, criterion4},
        {5, "heavy-tailed k-means rate", 600.0, criterion5},
        {6, "Bernstein verification", 120.0, criterion6},
        {7, "net suite", 60.0, criterion7},
        {8, "thread-count reproducibility", 900.0, criterion8},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criterion.fn();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail << " [EXCEPTION: " << e.what() << "]";
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.budget_seconds) {
            check.ok = false;
            check.detail << " [FAIL: runtime " << elapsed << "s exceeds budget "
                         << criterion.budget_seconds << "s]";
        }
        if (!check.ok) ++failures;
        std::cout << "criterion " << criterion.id << " (" << criterion.name
                  << "): " << (check.ok ? "PASS" : "FAIL") << " [" << elapsed << "s]"
                  << check.detail.str() << "\n";
    }
    return failures;
}
