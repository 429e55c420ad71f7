#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shiftlab/engine.hpp"

namespace shiftlab {

// Configuration problems map to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Declarative oracle-path description; materialized once d and T are fixed.
struct PathSpec {
    std::string kind = "constant";  // constant | spiral | realized
    // spiral
    double a = 1.0;
    double b = -1.0;
    int k = 4;
    int downsample = 1;
    // realized
    std::string gamma_kind = "smooth";  // smooth | bursty
    double alpha = 1.0;
    int episode_len = 40;
    double s = 1.0;
    std::uint64_t path_seed = 7;
    Vec start;  // padded with zeros to dimension d
    // constant
    Vec point;
};

OraclePath build_path(const PathSpec& spec, int d, int T);

struct SweepSpec {
    std::string param;  // eta | d | l | scheduler
    std::vector<double> values;
    std::vector<std::string> scheduler_values;
    std::vector<std::uint64_t> seeds{1};
    bool epsilon_inv_sqrt_d = false;  // alg1 epsilon = 1/sqrt(d) during d sweeps
};

struct ValidationSpec {
    double tolerance = 0.10;
    int replicas = 10000;
    double coarse_epsilon = 0.1;
    int bound_replicas = 100;
};

struct SteinSpec {
    int d = 3;
    long n = 1000000;
    double tolerance = 0.02;
    std::uint64_t seed = 1;
};

struct OutputSpec {
    std::string dir = ".";
    bool write_path = false;
};

struct AppConfig {
    ExperimentConfig engine;  // engine.path is filled by materialize()
    PathSpec path_spec;
    SweepSpec sweep;
    ValidationSpec validation;
    SteinSpec stein;
    OutputSpec output;
    std::string raw_json;  // config echo for summaries

    // Builds the oracle path for the current engine.d / engine.horizon.
    ExperimentConfig materialize() const;
};

AppConfig load_config(const std::string& file_path);
AppConfig parse_config(const std::string& json_text);

}  // namespace shiftlab
