#include "polyfrac/jobs.hpp"
#include "polyfrac/spectral.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Moment formulas and validation jobs for time-changed polynomial processes"};

    std::string config_path;
    std::string output_override;
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    int jobs = 1;
    app.add_option("--config", config_path, "Job configuration file (TOML or JSON)")->required();
    app.add_option("--output", output_override, "Override the configured output path");
    app.add_option("--seed", seed_override, "Override the simulation seed")
        ->each([&](const std::string&) { has_seed = true; });
    app.add_option("--jobs", jobs, "Worker thread cap for simulation jobs")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        polyfrac::JobConfig cfg = polyfrac::parse_config_file(config_path);
        if (!output_override.empty()) cfg.output_path = output_override;
        if (has_seed) cfg.sim.seed = seed_override;
        cfg.sim.jobs = jobs;

        const polyfrac::JobResult result = polyfrac::run_job(cfg);
        const std::string rendered =
            cfg.format == "json" ? polyfrac::to_json(result) : polyfrac::to_csv(result);
        if (cfg.output_path.empty()) {
            std::cout << rendered;
        } else {
            std::ofstream out(cfg.output_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write output file '" << cfg.output_path << "'\n";
                return 2;
            }
            out << rendered;
        }
        return result.exit_code;
    } catch (const polyfrac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
