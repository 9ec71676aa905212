#pragma once

#include "polyfrac/models.hpp"
#include "polyfrac/montecarlo.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace polyfrac {

/// Raised for malformed or invalid configuration; the message carries the
/// offending key path. Maps to exit code 1 in the CLI.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JobConfig {
    ModelSpec model{BrownianMotionParams{}};
    std::string query;  // moments | correlation | cross-moments | simulate | validate
    // polynomial terms as (exponent tuple, coefficient)
    std::vector<std::pair<std::vector<int>, double>> p_terms;
    std::vector<std::pair<std::vector<int>, double>> q_terms;
    Eigen::VectorXd x0;
    std::vector<double> t_grid;
    std::vector<double> s_grid;
    std::vector<double> alpha_grid;
    int max_degree = 6;
    SimConfig sim;
    std::string output_path;  // empty: stdout
    std::string format = "csv";
};

/// Parses TOML (subset: sections, scalar and flat-array values, # comments)
/// or JSON, chosen by file extension (.json) with TOML as the default.
JobConfig parse_config_file(const std::string& path);
JobConfig parse_config_text(const std::string& text, bool is_json);

/// Builds the polynomial from parsed terms on the degree-`degree` basis.
PolyVec build_polynomial(const std::vector<std::pair<std::vector<int>, double>>& terms, int dim,
                         int degree);

}  // namespace polyfrac
