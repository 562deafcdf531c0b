// ratelab - empirical fast-rate laboratory for heavy-tailed ERM.
//
// Subcommands:
//   rates run       run a rate experiment from a JSON config
//   rates fit       refit a rate exponent from a raw trial CSV
//   bounds eval     evaluate a closed-form bound from a JSON parameter object
//   bernstein check probe and fit the multi-scale Bernstein condition
//   net build       build a grid epsilon-net and serialize its members
//
// Verdict-producing commands exit 0 on PASS, 2 on FAIL, 3 on VACUOUS.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ratelab/bernstein.hpp"
#include "ratelab/math.hpp"
#include "ratelab/bounds.hpp"
#include "ratelab/experiments.hpp"
#include "ratelab/nets.hpp"
#include "ratelab/serialization.hpp"

using nlohmann::json;
using namespace ratelab;

namespace {

std::string read_text(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cmd_rates_run(const std::string& config_path, int threads_override,
                  const std::string& output_override) {
    ExperimentConfig config = config_from_json_string(read_text(config_path));
    if (threads_override > 0) config.threads = threads_override;
    if (!output_override.empty()) config.output_dir = output_override;

    const RunResult result = run(config);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    std::size_t failures = 0;
    for (const auto& rec : result.raw)
        if (rec.status != "ok") ++failures;
    if (failures > 0)
        std::cerr << "warning: " << failures << " trial(s) failed and were excluded\n";

    json summary;
    summary["name"] = config.name;
    summary["points"] = json::array();
    for (const auto& p : result.curve.points)
        summary["points"].push_back({{"n", p.n},
                                     {"median", p.median},
                                     {"q90", p.q90},
                                     {"mean", p.mean},
                                     {"trials_ok", p.trials_ok},
                                     {"clip_rate", p.clip_rate}});
    summary["fit"] = {{"beta_hat", result.curve.fit.beta_hat},
                      {"se", result.curve.fit.se},
                      {"valid", result.curve.fit.valid},
                      {"window_n", result.curve.fit.window_n},
                      {"diagnostic", result.curve.fit.diagnostic}};

    if (!result.curve.fit.valid) {
        summary["verdict"] = "INVALID_FIT";
        std::cout << summary.dump(2) << "\n";
        return 3;
    }
    const TheoryComparison cmp = compare_theory(result.curve);
    summary["theory"] = {{"beta_max", cmp.beta_theory},
                         {"margin", cmp.margin},
                         {"summary", cmp.summary}};
    summary["verdict"] = cmp.verdict == Verdict::Pass    ? "PASS"
                         : cmp.verdict == Verdict::Fail ? "FAIL"
                                                         : "VACUOUS";
    std::cout << summary.dump(2) << "\n";
    return verdict_exit_code(cmp.verdict);
}

int cmd_rates_fit(const std::string& input, int window) {
    const auto raw = read_raw_csv(input);
    std::map<std::size_t, std::vector<double>> by_n;
    for (const auto& rec : raw)
        if (rec.status == "ok") by_n[rec.n].push_back(rec.excess);

    std::vector<std::pair<std::size_t, double>> medians;
    for (auto& [n, values] : by_n) {
        std::sort(values.begin(), values.end());
        medians.push_back({n, quantile_sorted(values, 0.5)});
    }
    const RateFit fit = fit_rate(medians, window);
    json out = {{"beta_hat", fit.beta_hat},
                {"se", fit.se},
                {"window_n", fit.window_n},
                {"valid", fit.valid},
                {"diagnostic", fit.diagnostic}};
    std::cout << out.dump(2) << "\n";
    return fit.valid ? 0 : 1;
}

int cmd_bounds_eval(const std::string& input) {
    const json req = json::parse(read_text(input));
    const auto op = req.at("op").get<std::string>();
    json out = {{"op", op}, {"value", nullptr}, {"argmin_l", nullptr}, {"diagnostics", json::object()}};

    if (op == "exponent_a") {
        out["value"] = exponent_a(req.at("l").get<double>(), req.at("r").get<double>(),
                                  req.at("c_entropy").get<double>(), req.at("beta").get<double>(),
                                  req.at("alpha").get<double>());
    } else if (op == "admissible_beta") {
        const auto interval = admissible_beta(req.at("r").get<double>(),
                                              req.at("c_entropy").get<double>(),
                                              req.at("alpha").get<double>());
        out["value"] = interval.empty ? 0.0 : interval.beta_max;
        out["diagnostics"] = {{"empty", interval.empty}, {"note", interval.diagnostic}};
        if (!interval.empty)
            out["diagnostics"]["witness_l_at_half_beta_max"] =
                interval.witness_l(0.5 * interval.beta_max);
    } else if (op == "lederer_tail") {
        std::optional<double> override;
        if (req.contains("constant_override")) override = req.at("constant_override").get<double>();
        const auto tb = lederer_tail(req.at("n").get<double>(), req.at("r").get<double>(),
                                     req.at("m").get<double>(), req.at("sigma").get<double>(),
                                     req.at("zeta").get<double>(), req.at("x").get<double>(),
                                     override);
        out["value"] = tb.bound;
        out["argmin_l"] = tb.argmin_l;
        out["diagnostics"] = {{"vacuous", tb.bound >= 1.0}};
    } else if (op == "reverse_holder") {
        const auto values = req.at("values").get<std::vector<double>>();
        std::vector<double> weights;
        if (req.contains("weights")) weights = req.at("weights").get<std::vector<double>>();
        const auto check = reverse_holder_check(values, req.at("r").get<double>(), weights);
        out["value"] = check.holds;
        out["diagnostics"] = {{"lhs", check.lhs}, {"rhs", check.rhs}};
    } else if (op == "implicit_bound") {
        out["value"] = implicit_bound(req.at("a").get<double>(), req.at("b").get<double>(),
                                      req.at("nu").get<double>());
        const auto c = implicit_bound_constants(req.at("nu").get<double>());
        out["diagnostics"] = {{"c1", c.c1}, {"c2", c.c2}};
    } else if (op == "guaranteed_rate") {
        BoundParams params;
        params.r = req.at("r").get<double>();
        params.c_entropy = req.at("c_entropy").get<double>();
        if (req.contains("k_entropy")) params.k_entropy = req.at("k_entropy").get<double>();
        if (req.contains("w")) params.w_envelope = req.at("w").get<double>();
        if (req.contains("n")) params.n = req.at("n").get<double>();
        if (req.contains("delta")) params.delta = req.at("delta").get<double>();
        BernsteinProfile profile;
        for (const auto& g : req.at("gammas")) profile.pieces.push_back({"", 1.0, g.get<double>()});
        const auto interval = guaranteed_rate(params, profile);
        out["value"] = interval.empty ? 0.0 : interval.beta_max;
        out["diagnostics"] = {{"empty", interval.empty}, {"note", interval.diagnostic}};
    } else if (op == "kmeans_rate") {
        const auto interval = kmeans_rate(req.at("r").get<double>(), req.at("k").get<int>(),
                                          req.at("d").get<int>());
        out["value"] = interval.empty ? 0.0 : interval.beta_max;
        out["diagnostics"] = {{"empty", interval.empty}, {"note", interval.diagnostic}};
    } else if (op == "far_field_bernstein") {
        const auto ff = far_field_bernstein(req.at("w").get<double>(), req.at("r").get<double>(),
                                            req.at("alpha").get<double>());
        out["value"] = ff.b;
        out["diagnostics"] = {{"gamma", ff.gamma},
                              {"m_threshold", ff.m_threshold},
                              {"threshold_ratio", ff.threshold_ratio}};
    } else {
        throw std::invalid_argument("unknown bounds op: " + op);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_bernstein_check(const std::string& input, const std::string& output_dir) {
    const json req = json::parse(read_text(input));
    const DistributionSpec spec = spec_from_json_string(req.at("spec").dump());
    const int k = req.value("k", 1);
    const double rho = req.at("rho").get<double>();
    const auto probes_requested = req.value("probes", std::size_t{40});
    const uint64_t seed = req.value("seed", uint64_t{1});

    OracleConfig oracle_config;
    if (req.contains("oracle")) {
        const auto& o = req.at("oracle");
        oracle_config.mode = oracle_mode_from_name(o.value("mode", std::string("monte_carlo")));
        oracle_config.n = o.value("n", std::size_t{1'000'000});
        oracle_config.seed = o.value("seed", uint64_t{915170623});
    } else if (k == 1) {
        oracle_config.mode = RiskOracle::Mode::ClosedFormK1;
    }

    const RiskOracle oracle = make_oracle(spec, k, rho, oracle_config);
    const auto codebooks = make_probe_codebooks(oracle, k, spec.dim, rho, probes_requested, seed);
    const auto probes = probe(codebooks, spec, oracle);
    const double tau = req.contains("tau") && !req.at("tau").is_null()
                           ? req.at("tau").get<double>()
                           : default_tau(oracle);
    const BernsteinFit fit = fit_multiscale(probes, tau);

    BernsteinProfile profile;
    profile.provenance = BernsteinProfile::Provenance::Estimated;
    for (const auto& piece : fit.pieces) profile.pieces.push_back({piece.region, piece.b_hat, piece.gamma_hat});
    const auto violations = profile.pieces.empty()
                                ? std::vector<ProbeViolation>{}
                                : check_condition(probes, profile, tau);

    if (!output_dir.empty()) {
        std::filesystem::create_directories(output_dir);
        std::ofstream csv(output_dir + "/probes.csv");
        csv << "index,excess,second_moment,nearest_optimum,se_excess,se_second\n";
        char buf[128];
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const auto& p = probes[i];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%d,%.17g,%.17g\n", i, p.excess,
                          p.second_moment, p.nearest_optimum, p.se_excess, p.se_second);
            csv << buf;
        }
    }

    json out;
    out["tau"] = fit.tau;
    out["pieces"] = json::array();
    for (const auto& piece : fit.pieces)
        out["pieces"].push_back({{"region", piece.region},
                                 {"gamma_hat", piece.gamma_hat},
                                 {"gamma_se", piece.gamma_se},
                                 {"b_hat", piece.b_hat},
                                 {"satisfied", piece.satisfied},
                                 {"count", piece.count},
                                 {"dropped_zero_excess", piece.dropped_zero_excess}});
    out["violations_at_fit"] = violations.size();
    out["optimum_interior"] = oracle.optimum_interior;
    std::cout << out.dump(2) << "\n";

    bool all_satisfied = !fit.pieces.empty();
    for (const auto& piece : fit.pieces) all_satisfied = all_satisfied && piece.satisfied;
    return all_satisfied && violations.empty() ? 0 : 2;
}

int cmd_net_build(double rho, int d, int k, double epsilon, double mesh, double lipschitz,
                  double c_entropy, double k_entropy, const std::string& output) {
    EpsilonNet net = mesh > 0.0 ? build_net_mesh(rho, d, k, mesh, lipschitz)
                                : build_net(rho, d, k, epsilon, lipschitz);
    if (!output.empty()) save_net_members(net, output);

    json out = {{"members", net.member_count()},
                {"cells_per_axis", net.cells_per_axis()},
                {"mesh", net.mesh()},
                {"requested_mesh", net.requested_mesh()},
                {"epsilon", net.epsilon()},
                {"lipschitz_l", net.lipschitz_l()}};
    if (c_entropy > 0.0) {
        const auto check = entropy_check(net, c_entropy, k_entropy);
        out["entropy"] = {{"log_count", check.log_count},
                          {"bound", check.bound},
                          {"holds", check.holds},
                          {"k_min_at_kd", check.k_min_at_kd}};
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratelab: rate experiments and bound checks for heavy-tailed ERM"};
    app.require_subcommand(1);

    // rates
    auto* rates = app.add_subcommand("rates", "rate experiments");
    rates->require_subcommand(1);
    std::string run_config;
    int run_threads = 0;
    std::string run_output;
    auto* rates_run = rates->add_subcommand("run", "run an experiment config");
    rates_run->add_option("-c,--config", run_config, "experiment config JSON")->required();
    rates_run->add_option("--threads", run_threads, "worker threads (0 = hardware)");
    rates_run->add_option("-o,--output", run_output, "override output directory");

    std::string fit_input;
    int fit_window = 3;
    auto* rates_fit = rates->add_subcommand("fit", "fit a rate from a raw trial CSV");
    rates_fit->add_option("-i,--input", fit_input, "raw.csv path")->required();
    rates_fit->add_option("--window", fit_window, "fit window (largest n's)")->capture_default_str();

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form bound evaluators");
    bounds->require_subcommand(1);
    std::string bounds_input = "-";
    auto* bounds_eval = bounds->add_subcommand("eval", "evaluate an op from JSON (file or '-')");
    bounds_eval->add_option("-i,--input", bounds_input, "JSON parameter object")->capture_default_str();

    // bernstein
    auto* bernstein = app.add_subcommand("bernstein", "multi-scale Bernstein checks");
    bernstein->require_subcommand(1);
    std::string bern_input = "-";
    std::string bern_output;
    auto* bern_check = bernstein->add_subcommand("check", "probe + fit from a JSON config");
    bern_check->add_option("-c,--config", bern_input, "JSON config (file or '-')")->capture_default_str();
    bern_check->add_option("-o,--output", bern_output, "directory for probes.csv");

    // net
    auto* net = app.add_subcommand("net", "epsilon-net construction");
    net->require_subcommand(1);
    double net_rho = 1.0, net_eps = 0.0, net_mesh = 0.0, net_lip = 1.0;
    double net_c = 0.0, net_k_entropy = 1.0;
    int net_d = 1, net_k = 1;
    std::string net_output;
    auto* net_build = net->add_subcommand("build", "build a grid net");
    net_build->add_option("--rho", net_rho, "box radius")->required();
    net_build->add_option("-d,--dim", net_d, "point dimension")->required();
    net_build->add_option("-k,--centers", net_k, "codebook size")->required();
    net_build->add_option("--epsilon", net_eps, "target L2(P) radius");
    net_build->add_option("--mesh", net_mesh, "grid spacing (overrides epsilon)");
    net_build->add_option("--lipschitz", net_lip, "loss Lipschitz constant L")->capture_default_str();
    net_build->add_option("--c-entropy", net_c, "run entropy_check with this C");
    net_build->add_option("--k-entropy", net_k_entropy, "entropy scale K")->capture_default_str();
    net_build->add_option("-o,--output", net_output, "binary members output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rates_run->parsed()) return cmd_rates_run(run_config, run_threads, run_output);
        if (rates_fit->parsed()) return cmd_rates_fit(fit_input, fit_window);
        if (bounds_eval->parsed()) return cmd_bounds_eval(bounds_input);
        if (bern_check->parsed()) return cmd_bernstein_check(bern_input, bern_output);
        if (net_build->parsed()) {
            if (net_eps <= 0.0 && net_mesh <= 0.0)
                throw std::invalid_argument("net build: provide --epsilon or --mesh");
            return cmd_net_build(net_rho, net_d, net_k, net_eps, net_mesh, net_lip, net_c,
                                 net_k_entropy, net_output);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
