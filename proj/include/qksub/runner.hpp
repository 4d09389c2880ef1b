#pragma once

#include <map>

#include "qksub/examples.hpp"
#include "qksub/semi_invariant.hpp"

namespace qksub {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::string example_key = "r4-qk";
    std::string metric_variant;  // empty: example default
    std::string map_key;         // empty: example default
    int num_points = 25;
    uint64_t seed = 42;
    double fd_step = 1e-5;
    EngineMode engine = EngineMode::Dual;
    std::vector<std::string> suites{"all"};
    std::string output_format = "text";
    std::map<std::string, double> tol_overrides;  // suite name -> tolerance
};

struct RunResult {
    int exit_code = 0;
    std::string rendered;
    std::vector<CheckReport> checks;
};

const std::vector<std::string>& suite_names();

// Validates names, metric variants and overrides; throws ConfigError.
void validate(const RunConfig& cfg);

// Declarative key-value configuration file, merged over defaults.
RunConfig load_config(const std::string& path);

RunResult run(const RunConfig& cfg);

}  // namespace qksub
