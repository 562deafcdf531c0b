#pragma once

#include <string>

#include "ratelab/distributions.hpp"
#include "ratelab/experiments.hpp"
#include "ratelab/nets.hpp"
#include "ratelab/quantization.hpp"

namespace ratelab {

// JSON forms. DistributionSpec: {"family": ..., "params": {...}, "dim": ...}.
// Codebooks are arrays of arrays (one inner array per center).
std::string to_json_string(const DistributionSpec& spec, int indent = -1);
DistributionSpec spec_from_json_string(const std::string& text);

std::string to_json_string(const Codebook& cb, int indent = -1);
Codebook codebook_from_json_string(const std::string& text, double rho);

std::string to_json_string(const ExperimentConfig& config, int indent = -1);
ExperimentConfig config_from_json_string(const std::string& text);

std::string to_json_string(const RateCurve& curve, int indent = -1);
RateCurve curve_from_json_string(const std::string& text);

// Flat binary sample format: little-endian 64-bit floats, row-major, with a
// JSON sidecar <path>.json holding {n, d, seed, spec}.
void save_sample(const Sample& sample, const std::string& path);
Sample load_sample(const std::string& path);

// Nets reuse the binary sample format; members are points in R^(d*k) and the
// sidecar carries the net geometry instead of a source spec.
void save_net_members(const EpsilonNet& net, const std::string& path);

std::string erm_strategy_name(ErmStrategy s);
ErmStrategy erm_strategy_from_name(const std::string& name);
std::string oracle_mode_name(RiskOracle::Mode m);
RiskOracle::Mode oracle_mode_from_name(const std::string& name);

}  // namespace ratelab
