#pragma once

#include "polyfrac/config.hpp"

#include <string>
#include <vector>

namespace polyfrac {

struct JobResult {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // cells preformatted, 12 significant digits
    int exit_code = 0;  // 0 ok, 3 when a validation row fails
};

/// Executes the configured job. Throws ConfigError for semantic config
/// problems (exit 1 in the CLI) and NumericalError for numerical failures
/// (exit 2); a failing validate row sets exit_code 3 instead of throwing.
JobResult run_job(const JobConfig& cfg);

std::string to_csv(const JobResult& result);
std::string to_json(const JobResult& result);

/// 12-significant-digit rendering used for every numeric cell.
std::string format_number(double v);

}  // namespace polyfrac
