#include "ratelab/serialization.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ratelab {

using nlohmann::json;

namespace {

[[noreturn]] void io_error(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

json spec_to_json(const DistributionSpec& spec) {
    json params;
    if (const auto* mix = std::get_if<PointMassMixture>(&spec.family)) {
        json atoms = json::array();
        for (const auto& a : mix->atoms)
            atoms.push_back({{"point", a.point}, {"weight", a.weight}});
        params["atoms"] = std::move(atoms);
    } else if (const auto* p = std::get_if<Pareto>(&spec.family)) {
        params = {{"shape", p->shape}, {"scale", p->scale}};
    } else if (const auto* t = std::get_if<StudentT>(&spec.family)) {
        params = {{"nu", t->nu}, {"scale", t->scale}};
    } else if (const auto* l = std::get_if<Lognormal>(&spec.family)) {
        params = {{"log_mean", l->log_mean}, {"log_stddev", l->log_stddev}};
    } else if (const auto* g = std::get_if<Gaussian>(&spec.family)) {
        params = {{"mean", g->mean}, {"stddev", g->stddev}};
    } else if (const auto* u = std::get_if<Uniform>(&spec.family)) {
        params = {{"lo", u->lo}, {"hi", u->hi}};
    }
    return {{"family", family_name(spec)}, {"params", std::move(params)}, {"dim", spec.dim}};
}

DistributionSpec spec_from_json(const json& j) {
    DistributionSpec spec;
    spec.dim = j.at("dim").get<int>();
    const auto family = j.at("family").get<std::string>();
    const auto& p = j.at("params");
    if (family == "point_mass_mixture") {
        PointMassMixture mix;
        for (const auto& a : p.at("atoms"))
            mix.atoms.push_back({a.at("point").get<std::vector<double>>(), a.at("weight").get<double>()});
        spec.family = std::move(mix);
    } else if (family == "pareto") {
        spec.family = Pareto{p.at("shape").get<double>(), p.value("scale", 1.0)};
    } else if (family == "student_t") {
        spec.family = StudentT{p.at("nu").get<double>(), p.value("scale", 1.0)};
    } else if (family == "lognormal") {
        spec.family = Lognormal{p.value("log_mean", 0.0), p.at("log_stddev").get<double>()};
    } else if (family == "gaussian") {
        spec.family = Gaussian{p.value("mean", 0.0), p.at("stddev").get<double>()};
    } else if (family == "uniform") {
        spec.family = Uniform{p.at("lo").get<double>(), p.at("hi").get<double>()};
    } else {
        throw std::invalid_argument("unknown distribution family: " + family);
    }
    validate(spec);
    return spec;
}

json codebook_to_json(const Codebook& cb) {
    json centers = json::array();
    for (int c = 0; c < cb.k; ++c) {
        const auto span = cb.center(c);
        centers.push_back(std::vector<double>(span.begin(), span.end()));
    }
    return centers;
}

Codebook codebook_from_json(const json& j, double rho) {
    Codebook cb;
    cb.rho = rho;
    cb.k = static_cast<int>(j.size());
    if (cb.k == 0) throw std::invalid_argument("codebook JSON must have at least one center");
    cb.d = static_cast<int>(j.front().size());
    for (const auto& center : j) {
        if (static_cast<int>(center.size()) != cb.d)
            throw std::invalid_argument("codebook JSON has ragged centers");
        for (const auto& v : center) cb.centers.push_back(v.get<double>());
    }
    return cb;
}

json config_to_json(const ExperimentConfig& c) {
    return {{"schema", c.schema},
            {"name", c.name},
            {"spec", spec_to_json(c.spec)},
            {"k", c.k},
            {"d", c.d},
            {"rho", c.rho},
            {"n_grid", c.n_grid},
            {"trials", c.trials},
            {"base_seed", c.base_seed},
            {"erm_strategy", erm_strategy_name(c.erm_strategy)},
            {"lloyd_restarts", c.lloyd_restarts},
            {"oracle",
             {{"mode", oracle_mode_name(c.oracle.mode)},
              {"n", c.oracle.n},
              {"seed", c.oracle.seed}}},
            {"r_assumed", c.r_assumed},
            {"fit_window", c.fit_window},
            {"output_dir", c.output_dir},
            {"threads", c.threads}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.schema = j.value("schema", 1);
    if (c.schema != 1)
        throw std::invalid_argument("unsupported config schema " + std::to_string(c.schema));
    c.name = j.value("name", std::string("experiment"));
    c.spec = spec_from_json(j.at("spec"));
    c.k = j.at("k").get<int>();
    c.d = j.value("d", c.spec.dim);
    c.rho = j.at("rho").get<double>();
    c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    c.trials = j.at("trials").get<std::size_t>();
    c.base_seed = j.at("base_seed").get<uint64_t>();
    c.erm_strategy = erm_strategy_from_name(j.value("erm_strategy", std::string("exact_1d")));
    c.lloyd_restarts = j.value("lloyd_restarts", 32);
    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        c.oracle.mode = oracle_mode_from_name(o.value("mode", std::string("monte_carlo")));
        c.oracle.n = o.value("n", std::size_t{1'000'000});
        c.oracle.seed = o.value("seed", uint64_t{915170623});
    }
    c.r_assumed = j.value("r_assumed", 4.0);
    c.fit_window = j.value("fit_window", 3);
    c.output_dir = j.value("output_dir", std::string());
    c.threads = j.value("threads", 0);
    return c;
}

json curve_to_json(const RateCurve& curve) {
    json points = json::array();
    for (const auto& p : curve.points)
        points.push_back({{"n", p.n},
                          {"median", p.median},
                          {"q90", p.q90},
                          {"mean", p.mean},
                          {"trials_ok", p.trials_ok},
                          {"clip_rate", p.clip_rate}});
    return {{"schema", 1},
            {"config", config_to_json(curve.config)},
            {"points", std::move(points)},
            {"fit",
             {{"beta_hat", curve.fit.beta_hat},
              {"se", curve.fit.se},
              {"window_n", curve.fit.window_n},
              {"valid", curve.fit.valid},
              {"diagnostic", curve.fit.diagnostic}}},
            {"theory",
             {{"beta_max", curve.theory.beta_max},
              {"r", curve.theory.r},
              {"empty", curve.theory.empty},
              {"diagnostic", curve.theory.diagnostic}}}};
}

RateCurve curve_from_json(const json& j) {
    RateCurve curve;
    curve.config = config_from_json(j.at("config"));
    for (const auto& p : j.at("points")) {
        CurvePoint point;
        point.n = p.at("n").get<std::size_t>();
        point.median = p.at("median").get<double>();
        point.q90 = p.at("q90").get<double>();
        point.mean = p.at("mean").get<double>();
        point.trials_ok = p.at("trials_ok").get<std::size_t>();
        point.clip_rate = p.at("clip_rate").get<double>();
        curve.points.push_back(point);
    }
    const auto& f = j.at("fit");
    curve.fit.beta_hat = f.at("beta_hat").get<double>();
    curve.fit.se = f.at("se").get<double>();
    curve.fit.window_n = f.at("window_n").get<std::vector<std::size_t>>();
    curve.fit.valid = f.at("valid").get<bool>();
    curve.fit.diagnostic = f.at("diagnostic").get<std::string>();
    const auto& t = j.at("theory");
    curve.theory.beta_max = t.at("beta_max").get<double>();
    curve.theory.r = t.at("r").get<double>();
    curve.theory.empty = t.at("empty").get<bool>();
    curve.theory.diagnostic = t.at("diagnostic").get<std::string>();
    return curve;
}

}  // namespace

std::string to_json_string(const DistributionSpec& spec, int indent) {
    return spec_to_json(spec).dump(indent);
}

DistributionSpec spec_from_json_string(const std::string& text) {
    return spec_from_json(json::parse(text));
}

std::string to_json_string(const Codebook& cb, int indent) {
    return codebook_to_json(cb).dump(indent);
}

Codebook codebook_from_json_string(const std::string& text, double rho) {
    return codebook_from_json(json::parse(text), rho);
}

std::string to_json_string(const ExperimentConfig& config, int indent) {
    return config_to_json(config).dump(indent);
}

ExperimentConfig config_from_json_string(const std::string& text) {
    return config_from_json(json::parse(text));
}

std::string to_json_string(const RateCurve& curve, int indent) {
    return curve_to_json(curve).dump(indent);
}

RateCurve curve_from_json_string(const std::string& text) {
    return curve_from_json(json::parse(text));
}

void save_sample(const Sample& sample, const std::string& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) io_error("cannot open for writing", path);
        static_assert(sizeof(double) == 8);
        out.write(reinterpret_cast<const char*>(sample.data.data()),
                  static_cast<std::streamsize>(sample.data.size() * sizeof(double)));
        if (!out) io_error("short write", path);
    }
    json sidecar = {{"n", sample.n},
                    {"d", sample.dim},
                    {"seed", sample.seed},
                    {"spec", spec_to_json(sample.spec)}};
    std::ofstream meta(path + ".json");
    if (!meta) io_error("cannot open for writing", path + ".json");
    meta << sidecar.dump(2) << "\n";
}

Sample load_sample(const std::string& path) {
    std::ifstream meta(path + ".json");
    if (!meta) io_error("cannot open sidecar", path + ".json");
    json sidecar = json::parse(meta);

    Sample s;
    s.n = sidecar.at("n").get<std::size_t>();
    s.dim = sidecar.at("d").get<int>();
    s.seed = sidecar.value("seed", uint64_t{0});
    if (sidecar.contains("spec") && !sidecar.at("spec").is_null())
        s.spec = spec_from_json(sidecar.at("spec"));
    else
        s.spec.dim = s.dim;

    std::ifstream in(path, std::ios::binary);
    if (!in) io_error("cannot open for reading", path);
    s.data.resize(s.n * static_cast<std::size_t>(s.dim));
    in.read(reinterpret_cast<char*>(s.data.data()),
            static_cast<std::streamsize>(s.data.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(s.data.size() * sizeof(double)))
        io_error("binary payload shorter than sidecar count", path);
    return s;
}

void save_net_members(const EpsilonNet& net, const std::string& path) {
    const auto dims = static_cast<std::size_t>(net.d()) * net.k();
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) io_error("cannot open for writing", path);
        for (std::size_t i = 0; i < net.member_count(); ++i) {
            const auto member = net.member(i);
            out.write(reinterpret_cast<const char*>(member.centers.data()),
                      static_cast<std::streamsize>(dims * sizeof(double)));
        }
        if (!out) io_error("short write", path);
    }
    json sidecar = {{"n", net.member_count()},
                    {"d", dims},
                    {"seed", 0},
                    {"spec", nullptr},
                    {"net",
                     {{"rho", net.rho()},
                      {"d", net.d()},
                      {"k", net.k()},
                      {"cells_per_axis", net.cells_per_axis()},
                      {"mesh", net.mesh()},
                      {"requested_mesh", net.requested_mesh()},
                      {"lipschitz_l", net.lipschitz_l()},
                      {"epsilon", net.epsilon()}}}};
    std::ofstream meta(path + ".json");
    if (!meta) io_error("cannot open for writing", path + ".json");
    meta << sidecar.dump(2) << "\n";
}

std::string erm_strategy_name(ErmStrategy s) {
    switch (s) {
        case ErmStrategy::Exact1D: return "exact_1d";
        case ErmStrategy::BruteForceTiny: return "brute_force_tiny";
        case ErmStrategy::LloydMultistart: return "lloyd_multistart";
    }
    throw std::invalid_argument("unknown ERM strategy");
}

ErmStrategy erm_strategy_from_name(const std::string& name) {
    if (name == "exact_1d") return ErmStrategy::Exact1D;
    if (name == "brute_force_tiny") return ErmStrategy::BruteForceTiny;
    if (name == "lloyd_multistart") return ErmStrategy::LloydMultistart;
    throw std::invalid_argument("unknown ERM strategy: " + name);
}

std::string oracle_mode_name(RiskOracle::Mode m) {
    switch (m) {
        case RiskOracle::Mode::ExactDiscrete: return "exact_discrete";
        case RiskOracle::Mode::MonteCarlo: return "monte_carlo";
        case RiskOracle::Mode::ClosedFormK1: return "closed_form_k1";
    }
    throw std::invalid_argument("unknown oracle mode");
}

RiskOracle::Mode oracle_mode_from_name(const std::string& name) {
    if (name == "exact_discrete") return RiskOracle::Mode::ExactDiscrete;
    if (name == "monte_carlo") return RiskOracle::Mode::MonteCarlo;
    if (name == "closed_form_k1") return RiskOracle::Mode::ClosedFormK1;
    throw std::invalid_argument("unknown oracle mode: " + name);
}

}  // namespace ratelab
