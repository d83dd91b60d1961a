#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "specshare/csvjson.hpp"
#include "specshare/montecarlo.hpp"

namespace specshare {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A parsed run configuration. Exactly one of `gains` (single explicit
// instance) or `channel` (random ensemble) is present. The command picks the
// algorithm; everything else lives here.
struct LoadedConfig {
    NetworkConfig network;
    std::optional<GainTensor> gains;
    std::optional<ChannelModel> channel;
    std::size_t realizations = 1;
    std::uint64_t seed = 1;
    InitPolicy init = InitPolicy::Waterfill;
    std::vector<double> init_p1;  // used when init == Given
    IterationSchedule schedule;
    SearchSpec search;
    double ne_tol = 1e-8;
    std::size_t ne_sweeps = 500;
    SweepOrder ne_order = SweepOrder::Simultaneous;
    std::size_t curve_cap = 0;
};

// Parses and validates; throws ConfigError naming the offending field.
LoadedConfig parse_config(const json& doc);
LoadedConfig load_config_file(const std::filesystem::path& path);

// Fully resolved document (defaults filled in); a fixed point of parse_config,
// used for manifests and the round-trip guarantee.
json config_to_json(const LoadedConfig& cfg);

// Assembles the batch spec for an ensemble config.
ExperimentSpec make_experiment(const LoadedConfig& cfg, AlgorithmKind algorithm);

}  // namespace specshare
