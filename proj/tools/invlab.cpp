// Experiment runner over the inverse-problems laboratory pipelines.
#include <cstdio>
#include <iostream>
#include <string>

#include "invlab/pipelines.hpp"

namespace {

void print_help() {
    std::cout <<
        "Usage: invlab run --config PATH [--out DIR] [--kmax K] [--eps E] [--power M]\n"
        "       invlab validate --config PATH\n"
        "\n"
        "Pipelines (one [section] per config): identity-suite, elliptic-recon,\n"
        "wave-fig4, wave-sweep, passive-cone. The first section of the config is\n"
        "executed. Thread count comes from INVLAB_THREADS (default: hardware).\n";
}

} // namespace

int main(int argc, char* argv[]) {
    try {
        if (argc < 2) {
            print_help();
            return 1;
        }
        std::string cmd = argv[1];
        if (cmd == "--help" || cmd == "-h" || cmd == "help") {
            print_help();
            return 0;
        }

        std::string config_path, out_dir = "out";
        std::string kmax_override, eps_override, power_override;
        for (int i = 2; i < argc; ++i) {
            std::string arg = argv[i];
            auto value = [&](const char* flag) {
                if (i + 1 >= argc) throw invlab::ConfigError(std::string("missing value for ") + flag);
                return std::string(argv[++i]);
            };
            if (arg == "--config") config_path = value("--config");
            else if (arg == "--out") out_dir = value("--out");
            else if (arg == "--kmax") kmax_override = value("--kmax");
            else if (arg == "--eps") eps_override = value("--eps");
            else if (arg == "--power") power_override = value("--power");
            else throw invlab::ConfigError("unknown option: " + arg);
        }
        if (config_path.empty()) throw invlab::ConfigError("--config is required");

        std::vector<invlab::ExperimentConfig> sections = invlab::parse_config_file(config_path);

        if (cmd == "validate") {
            for (const auto& cfg : sections) invlab::validate_experiment(cfg);
            std::cout << "config ok: " << sections.size() << " pipeline section(s)\n";
            return 0;
        }
        if (cmd != "run") {
            print_help();
            return 1;
        }

        invlab::ExperimentConfig cfg = sections.front();
        if (!kmax_override.empty()) cfg.kv["kmax"] = kmax_override;
        if (!eps_override.empty()) cfg.kv["eps"] = eps_override;
        if (!power_override.empty()) cfg.kv["m"] = power_override;

        invlab::RunResult result = invlab::run_experiment(cfg, out_dir);
        std::cout << result.summary;
        std::cout << (result.ok ? "status: ok" : "status: FAILED") << "\n";
        std::cout << "artifacts in " << out_dir << " (see manifest)\n";
        return result.ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
